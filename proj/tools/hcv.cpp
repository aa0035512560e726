#include "hcv/cli/run.hpp"

int main(int argc, char** argv) { return hcv::cli::run(argc, argv); }
