#include "mobigraph/cli.hpp"

int main(int argc, char** argv) { return mobigraph::dispatch(argc, argv); }
