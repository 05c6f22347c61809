#include "genic/pipeline.h"

int main(int argc, char **argv) { return genic::RunCli(argc, argv); }
