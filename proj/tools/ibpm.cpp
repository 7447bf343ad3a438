// SPDX-License-Identifier: Apache-2.0
#include "ibpm/cli.hpp"

int main(int argc, char** argv) { return ibpm::run_cli(argc, argv); }
