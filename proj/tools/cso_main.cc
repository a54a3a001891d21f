#include "cso/cli.h"

int main(int argc, char **argv) { return cso::RunCli(argc, argv); }
