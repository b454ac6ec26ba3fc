#include "qrfsj/cli.hpp"

int main(int argc, char** argv) { return qrfsj::run_cli(argc, argv); }
