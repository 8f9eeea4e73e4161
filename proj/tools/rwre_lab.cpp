#include <iostream>
#include <string>
#include <vector>

#include "rwre/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rwre::cli::run(args, std::cout, std::cerr);
}
