/*
 * rstar: desk-scale 4D cone-beam CT artifact laboratory
 *
 * Copyright 2026 the rstar developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Internal binary stream helpers shared by the container writers. Not part
// of the installed API.

#ifndef RSTAR_BINIO_HPP
#define RSTAR_BINIO_HPP

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "rstar/types.hpp"

static_assert(std::endian::native == std::endian::little,
              "container formats are little-endian; big-endian hosts unsupported");

namespace rstar::detail {

class Reader {
public:
  explicit Reader(const std::filesystem::path& path)
      : path_(path.string()), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path_ + " for reading");
  }

  void raw(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw IoError("truncated file: " + path_);
  }

  template <typename T>
  T scalar() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }

  void expect_magic(const char magic[4]) {
    char buf[4];
    raw(buf, 4);
    if (std::memcmp(buf, magic, 4) != 0)
      throw IntegrityError("bad magic in " + path_ + " (expected " +
                           std::string(magic, 4) + ")");
  }

  void expect_eof() {
    char c;
    in_.read(&c, 1);
    if (!in_.eof())
      throw IntegrityError("trailing bytes in " + path_);
  }

  const std::string& path() const { return path_; }

private:
  std::string path_;
  std::ifstream in_;
};

class Writer {
public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path.string()), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path_ + " for writing");
  }

  void raw(const void* src, std::size_t n) {
    out_.write(static_cast<const char*>(src), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed: " + path_);
  }

  template <typename T>
  void scalar(T v) {
    raw(&v, sizeof(T));
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("close failed: " + path_);
  }

private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace rstar::detail

#endif  // RSTAR_BINIO_HPP
