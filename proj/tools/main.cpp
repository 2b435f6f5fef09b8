#include "cli.hpp"

int main(int argc, char** argv) {
  return relpatch::cli_main(argc, argv);
}
