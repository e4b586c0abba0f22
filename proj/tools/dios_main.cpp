#include "dios/cli.hpp"

int main(int argc, char** argv) { return dios::run(argc, argv); }
