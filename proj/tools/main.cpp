#include "povmshadow/harness.hpp"

int main(int argc, char** argv) { return povmshadow::cli_dispatch(argc, argv); }
