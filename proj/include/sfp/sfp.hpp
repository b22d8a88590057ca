#pragma once

#include "sfp/data_pipeline.hpp"
#include "sfp/entropy_simplex.hpp"
#include "sfp/errors.hpp"
#include "sfp/evaluation.hpp"
#include "sfp/gme_bridge.hpp"
#include "sfp/inference.hpp"
#include "sfp/losses.hpp"
#include "sfp/matrix.hpp"
#include "sfp/model.hpp"
#include "sfp/model_io.hpp"
#include "sfp/random.hpp"
#include "sfp/training.hpp"
