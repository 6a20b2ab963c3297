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
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmn/error.hpp"

// Little-endian byte encoding for the on-disk formats. Values are encoded
// byte by byte so files are identical on every host.

namespace hmn::io {

class ByteWriter {
 public:
  void magic(std::string_view tag);
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32s(std::span<const float> v);
  void u32s(std::span<const std::uint32_t> v);
  void bytes(std::span<const std::uint8_t> v);

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> release() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  //! `what` names the format in diagnostics, e.g. "HMNM memory".
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  //! Throws FormatError when the next four bytes differ from `tag`.
  void expect_magic(std::string_view tag);
  //! Throws FormatError on any version other than `expected`.
  void expect_version(std::uint32_t expected);

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  void f32s(std::span<float> out);
  void u32s(std::span<std::uint32_t> out);

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }
  std::span<const std::uint8_t> rest() const { return data_.subspan(pos_); }
  void skip(std::size_t n);

  //! Throws LengthError unless `n` more bytes are available.
  void require(std::size_t n) const;
  //! Throws FormatError if unread bytes remain.
  void expect_end() const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

//! First four bytes of a file as text, or "" when the file is shorter.
std::string peek_magic(const std::filesystem::path& path);

}  // namespace hmn::io
