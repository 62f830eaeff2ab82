#include "audiorep/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return audiorep::run_cli(argc, argv, std::cout, std::cerr); }
