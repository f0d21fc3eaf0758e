#include "mfpg/cli.hpp"

int main(int argc, char** argv) { return mfpg::cli::run(argc, argv); }
