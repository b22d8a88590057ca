#include "sfp_cli.hpp"

int main(int argc, char** argv) { return sfp::cli::run(argc, argv); }
