// vrte.cpp - command-line entry point
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#include "vrte/cli.hpp"

int main(int argc, char** argv) { return vrte::run_cli(argc, argv); }
