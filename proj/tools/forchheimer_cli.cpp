#include <exception>
#include <iostream>

#include "forchheimer/cli.hpp"

int main(int argc, char** argv) {
  const auto parsed = forchheimer::cli::parse_args(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message << "\n";
    return parsed.exit_code;
  }
  try {
    return forchheimer::cli::run(*parsed.config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
