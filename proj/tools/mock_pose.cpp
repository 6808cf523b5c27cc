#include "gaitkit/backend/mock.hpp"

int main(int argc, char** argv) { return gaitkit::backend::mock_pose_main(argc, argv); }
