#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return planwarp::cli::run(argc, argv, std::cout, std::cerr); }
