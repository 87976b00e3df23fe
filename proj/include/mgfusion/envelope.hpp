// Copyright (c) 2026 The mgfusion Authors
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

// Binary envelope shared by replay ("MGFR") and weight ("MGFW") files:
//
//   4 bytes  magic
//   u8       version (1)
//   u32 LE   header length in bytes
//   ...      header, UTF-8 JSON
//   ...      payload, little-endian f32, no padding

#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgfusion/error.hpp"

namespace mgf {

inline constexpr std::uint8_t kEnvelopeVersion = 1;

struct Envelope {
  nlohmann::json header;
  std::vector<float> payload;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out += static_cast<char>((v >> s) & 0xFF);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

}  // namespace detail

inline std::string encode_envelope(std::string_view magic, const Envelope& env) {
  std::string out;
  const std::string header = env.header.dump();
  out.reserve(9 + header.size() + env.payload.size() * 4);
  out.append(magic);
  out += static_cast<char>(kEnvelopeVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (float f : env.payload) detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

/// Decodes an envelope. The payload is returned as-is; callers check its
/// length against the header and report TruncatedBody themselves.
inline Envelope decode_envelope(std::string_view magic, std::string_view bytes, const std::string& origin) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < magic.size() + 5 || bytes.substr(0, magic.size()) != magic)
    fail(Errc::BadMagic, origin + ": expected magic " + std::string(magic));
  const std::uint8_t version = p[magic.size()];
  if (version != kEnvelopeVersion)
    fail(Errc::BadMagic, origin + ": unsupported version " + std::to_string(version));
  const std::uint32_t header_len = detail::get_u32(p + magic.size() + 1);
  const std::size_t body_at = magic.size() + 5 + header_len;
  if (body_at > bytes.size()) fail(Errc::TruncatedBody, origin + ": header runs past end of file");

  Envelope env;
  try {
    env.header = nlohmann::json::parse(bytes.substr(magic.size() + 5, header_len));
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::ParseError, origin + ": header: " + e.what());
  }
  const std::size_t body_len = bytes.size() - body_at;
  if (body_len % 4 != 0) fail(Errc::TruncatedBody, origin + ": body is not a whole number of f32 values");
  env.payload.resize(body_len / 4);
  for (std::size_t i = 0; i < env.payload.size(); ++i)
    env.payload[i] = std::bit_cast<float>(detail::get_u32(p + body_at + 4 * i));
  return env;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::IoError, "short write to " + path);
}

}  // namespace mgf
