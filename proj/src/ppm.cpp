#include "fgan/ppm.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace fgan {

namespace {

struct Cursor {
  const std::vector<char>& buf;
  std::size_t pos = 0;

  bool eof() const { return pos >= buf.size(); }
  char peek() const { return buf[pos]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("ppm: " + what + " at byte " + std::to_string(pos));
  }

  void skip_space_and_comments() {
    while (!eof()) {
      const char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        return;
      }
    }
  }

  int read_int(const char* field) {
    skip_space_and_comments();
    if (eof() || peek() < '0' || peek() > '9') {
      fail(std::string("expected ") + field);
    }
    long v = 0;
    while (!eof() && peek() >= '0' && peek() <= '9') {
      v = v * 10 + (peek() - '0');
      if (v > 1'000'000'000L) fail(std::string(field) + " out of range");
      ++pos;
    }
    return static_cast<int>(v);
  }
};

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());

  Cursor cur{buf};
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '6') {
    cur.fail("not a P6 ppm (bad magic)");
  }
  cur.pos = 2;

  const int width = cur.read_int("width");
  const int height = cur.read_int("height");
  const int maxval = cur.read_int("maxval");
  if (width < 1 || height < 1) cur.fail("non-positive image extent");
  if (maxval != 255) cur.fail("maxval must be 255, got " + std::to_string(maxval));

  // Exactly one whitespace byte separates the header from the pixel data.
  if (cur.eof() || !(cur.peek() == '\n' || cur.peek() == ' ' || cur.peek() == '\t' ||
                     cur.peek() == '\r')) {
    cur.fail("expected whitespace after maxval");
  }
  ++cur.pos;

  const std::size_t need = static_cast<std::size_t>(3) * width * height;
  if (buf.size() - cur.pos < need) {
    throw ParseError("ppm: pixel data truncated, need " + std::to_string(need) +
                     " bytes, have " + std::to_string(buf.size() - cur.pos) +
                     " at byte " + std::to_string(cur.pos));
  }

  Image img(width, height);
  std::copy_n(buf.data() + cur.pos, need,
              reinterpret_cast<char*>(img.pixels.data()));
  return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(3) * image.width * image.height) {
    throw ContractError("write_ppm: malformed image");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fgan
