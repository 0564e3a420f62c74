#include "clogsim/cli.hpp"

int main(int argc, char** argv) { return clogsim::cli_main(argc, argv); }
