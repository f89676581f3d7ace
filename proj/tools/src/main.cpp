#include "commands.hpp"

int main(int argc, char** argv) { return gparc::cli::run(argc, argv); }
