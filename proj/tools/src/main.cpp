#include "cli.hpp"

int main(int argc, char** argv) { return crashdyn::cli::run(argc, argv); }
