#include <iostream>
#include <string>
#include <vector>

#include "hdi/pipeline.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return hdi::cli::run(args, std::cout, std::cerr);
}
