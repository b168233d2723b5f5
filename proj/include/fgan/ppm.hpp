#pragma once

#include <filesystem>

#include "fgan/image.hpp"

namespace fgan {

/// Binary P6 PPM with maxval 255. Header comments are tolerated on read and
/// never written; anything else is rejected with the byte offset of the
/// problem. write/read round-trips bit-exactly.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

}  // namespace fgan
