// SPDX-License-Identifier: Apache-2.0
#include "fdesic/cli.hpp"

int main(int argc, char** argv) { return fdesic::cli_main(argc, argv); }
