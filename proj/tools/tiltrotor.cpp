#include "tiltrotor/cli_io.hpp"

int main(int argc, char** argv) { return tiltrotor::cli(argc, argv); }
