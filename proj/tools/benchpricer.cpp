#include "experiments.hpp"

int main(int argc, char** argv) { return benchpricer::cli::run_main(argc, argv); }
