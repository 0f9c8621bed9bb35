#include <string>
#include <vector>

#include "hanforge/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hanforge::cli::dispatch(args);
}
