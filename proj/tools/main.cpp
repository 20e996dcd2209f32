#include "ringo/cli.hpp"

int main(int argc, char** argv) { return ringo::cliMain(argc, argv); }
