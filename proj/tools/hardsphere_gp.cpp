#include "hsgp/experiments.hpp"

int main(int argc, char** argv) { return hsgp::run_cli(argc, argv); }
