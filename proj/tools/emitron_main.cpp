#include "emitron/cli_report.h"

#include <iostream>

int main(int argc, char** argv)
{
    return emitron::run_cli(argc, argv, std::cout, std::cerr);
}
