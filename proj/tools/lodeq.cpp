#include "lodeq/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    lodeq::cli::RunReport report = lodeq::cli::run(args);
    std::string text = lodeq::cli::render(report);
    (report.exit_code == 0 ? std::cout : std::cerr) << text;
    return report.exit_code;
}
