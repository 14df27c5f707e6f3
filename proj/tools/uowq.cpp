#include "app.hpp"

int main(int argc, char** argv) { return uowq::app::run(argc, argv); }
