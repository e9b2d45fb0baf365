#include <iostream>

#include "elab/pipeline.hpp"

int main(int argc, char** argv) { return elab::run_cli(argc, argv, std::cout, std::cerr); }
