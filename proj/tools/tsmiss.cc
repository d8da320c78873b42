#include "tsmiss/cli.h"

int main(int argc, char** argv) { return tsmiss::cli::run(argc, argv); }
