#include "minor_dyson/cli/app.hpp"

int main(int argc, char** argv) { return minor_dyson::cli::run(argc, argv); }
