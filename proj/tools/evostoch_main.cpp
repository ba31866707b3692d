#include <string>
#include <vector>

#include "evostoch/cli.hpp"

int main(int argc, char** argv) {
    return evostoch::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
