#include <iostream>

#include "gse/cli.hpp"

int main(int argc, char** argv) {
    return gse::cli::dispatch(argc, argv, std::cout, std::cerr);
}
