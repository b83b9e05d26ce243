#include <iostream>

#include "greenwind/cli.hpp"

int main(int argc, char** argv) {
    return greenwind::cli::run(argc, argv, std::cout, std::cerr);
}
