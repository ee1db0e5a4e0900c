#include <iostream>
#include <string>
#include <vector>

#include "lexclass/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lexclass::run_cli(args, std::cout, std::cerr);
}
