#include <vector>
#include <string>

#include "lavlab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lavlab::run_cli(args);
}
