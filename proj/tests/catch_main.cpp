// Builds the amalgamated Catch2 v3 implementation (default main included).
#include <catch2/catch_amalgamated.cpp>
