#include <iostream>

#include "eeg/cli.hpp"

int main(int argc, char** argv) { return eeg::cli::run(argc, argv, std::cout, std::cerr); }
