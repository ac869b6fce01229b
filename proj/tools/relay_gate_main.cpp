#include "relaygate/cli_driver.hpp"

int main(int argc, char** argv) { return relaygate::run_cli(argc, argv); }
