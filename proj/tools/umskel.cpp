#include <iostream>
#include <string>
#include <vector>

#include "umskel/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return umskel::run_cli(args, std::cin, std::cout, std::cerr);
}
