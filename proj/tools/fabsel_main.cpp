#include "fabsel_app.hpp"

int main(int argc, char** argv) { return fabsel::cli::run(argc, argv); }
