#include <iostream>
#include <string>
#include <vector>

#include "downwash/cli/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return downwash::cli::run(args, std::cout, std::cerr);
}
