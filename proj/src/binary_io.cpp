// Copyright 2026 The HMN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "hmn/binary_io.hpp"

#include <fstream>
#include <iterator>

namespace hmn::io {

void ByteWriter::magic(std::string_view tag) {
  for (char c : tag) buf_.push_back(static_cast<std::uint8_t>(c));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::f32s(std::span<const float> v) {
  buf_.reserve(buf_.size() + 4 * v.size());
  for (float x : v) f32(x);
}

void ByteWriter::u32s(std::span<const std::uint32_t> v) {
  buf_.reserve(buf_.size() + 4 * v.size());
  for (std::uint32_t x : v) u32(x);
}

void ByteWriter::bytes(std::span<const std::uint8_t> v) {
  buf_.insert(buf_.end(), v.begin(), v.end());
}

void ByteReader::require(std::size_t n) const {
  if (remaining() < n) {
    throw LengthError(what_ + ": truncated (need " + std::to_string(n) +
                      " bytes at offset " + std::to_string(pos_) + ", have " +
                      std::to_string(remaining()) + ")");
  }
}

void ByteReader::expect_end() const {
  if (!at_end()) {
    throw FormatError(what_ + ": " + std::to_string(remaining()) +
                      " trailing bytes after payload");
  }
}

void ByteReader::expect_magic(std::string_view tag) {
  if (remaining() < tag.size()) {
    throw FormatError(what_ + ": file too short for magic");
  }
  for (std::size_t i = 0; i < tag.size(); ++i) {
    if (data_[pos_ + i] != static_cast<std::uint8_t>(tag[i])) {
      throw FormatError(what_ + ": bad magic, expected \"" + std::string(tag) +
                        "\"");
    }
  }
  pos_ += tag.size();
}

void ByteReader::expect_version(std::uint32_t expected) {
  if (remaining() < 4) throw FormatError(what_ + ": file too short for version");
  const std::uint32_t v = u32();
  if (v != expected) {
    throw FormatError(what_ + ": unsupported version " + std::to_string(v));
  }
}

std::uint8_t ByteReader::u8() {
  require(1);
  return data_[pos_++];
}

std::uint32_t ByteReader::u32() {
  require(4);
  std::uint32_t v = 0;
  for (int s = 0; s < 32; s += 8) v |= std::uint32_t{data_[pos_++]} << s;
  return v;
}

std::uint64_t ByteReader::u64() {
  require(8);
  std::uint64_t v = 0;
  for (int s = 0; s < 64; s += 8) v |= std::uint64_t{data_[pos_++]} << s;
  return v;
}

void ByteReader::f32s(std::span<float> out) {
  require(4 * out.size());
  for (float& x : out) x = f32();
}

void ByteReader::u32s(std::span<std::uint32_t> out) {
  require(4 * out.size());
  for (std::uint32_t& x : out) x = u32();
}

void ByteReader::skip(std::size_t n) {
  require(n);
  pos_ += n;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string peek_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  char buf[4];
  in.read(buf, 4);
  if (in.gcount() != 4) return {};
  return std::string(buf, 4);
}

}  // namespace hmn::io
