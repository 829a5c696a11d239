#include "domsfm/cli.hpp"

int main(int argc, char** argv) { return domsfm::run_cli(argc, argv); }
