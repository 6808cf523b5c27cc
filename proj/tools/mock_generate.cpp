#include "gaitkit/backend/mock.hpp"

int main(int argc, char** argv) { return gaitkit::backend::mock_generate_main(argc, argv); }
