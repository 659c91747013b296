#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "lwgnn/runtime.hpp"

int main(int argc, char** argv) {
    lwgnn::configure_allocator();
    const std::vector<std::string> args(argv + 1, argv + argc);
    return lwgnn::cli::run(args, std::cout, std::cerr);
}
