#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "owcsim/gf256.hpp"
#include "owcsim/rng.hpp"

// Generation-based random linear network coding over GF(2^8): a progressive
// encoder that emits random coefficient combinations of the source packets,
// and a Gauss-Jordan decoder that tracks partially recovered packets with a
// per-packet decoded mask.

namespace owcsim::rlnc {

// A fixed block of source packets coded together. Packets are stored
// row-major (row-major byte partitioning of the source buffer).
struct Generation {
  std::size_t packet_count = 0;  // packets per generation
  std::size_t packet_len = 0;    // bytes per packet
  std::vector<std::uint8_t> data;

  Generation(std::size_t count, std::size_t len)
      : packet_count(count), packet_len(len), data(count * len, 0) {
    if (count == 0 || len == 0) throw std::invalid_argument("rlnc: empty generation");
  }

  std::span<const std::uint8_t> packet(std::size_t i) const {
    return {data.data() + i * packet_len, packet_len};
  }
  std::span<std::uint8_t> packet(std::size_t i) {
    return {data.data() + i * packet_len, packet_len};
  }
};

// Partition a message buffer into a generation, zero-padding the tail.
inline Generation make_generation(std::size_t packet_count, std::size_t packet_len,
                                  std::span<const std::uint8_t> message) {
  Generation gen(packet_count, packet_len);
  if (message.size() > gen.data.size())
    throw std::invalid_argument("rlnc: message exceeds generation capacity");
  std::copy(message.begin(), message.end(), gen.data.begin());
  return gen;
}

struct CodedPacket {
  std::vector<std::uint8_t> coeffs;
  std::vector<std::uint8_t> payload;

  // Wire layout for fixtures: coeffs followed by payload.
  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out(coeffs);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
  }
  static CodedPacket deserialize(std::span<const std::uint8_t> bytes, std::size_t packet_count) {
    if (bytes.size() < packet_count)
      throw std::invalid_argument("rlnc: truncated coded packet");
    CodedPacket pkt;
    pkt.coeffs.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(packet_count));
    pkt.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(packet_count), bytes.end());
    return pkt;
  }
};

// payload = coeffs * source matrix.
inline CodedPacket combine(const Generation& gen, std::vector<std::uint8_t> coeffs) {
  if (coeffs.size() != gen.packet_count)
    throw std::invalid_argument("rlnc: coefficient count mismatch");
  CodedPacket pkt;
  pkt.payload.assign(gen.packet_len, 0);
  for (std::size_t i = 0; i < gen.packet_count; ++i) {
    const std::uint8_t c = coeffs[i];
    if (c == 0) continue;
    auto src = gen.packet(i);
    for (std::size_t j = 0; j < gen.packet_len; ++j)
      pkt.payload[j] = gf::add(pkt.payload[j], gf::mul(c, src[j]));
  }
  pkt.coeffs = std::move(coeffs);
  return pkt;
}

class Encoder {
 public:
  Encoder(const Generation& gen, std::uint64_t seed) : gen_(&gen), rng_(seed) {}

  CodedPacket next() {
    std::vector<std::uint8_t> coeffs(gen_->packet_count);
    for (auto& c : coeffs) c = rng_.byte();
    return combine(*gen_, std::move(coeffs));
  }

 private:
  const Generation* gen_;
  rng::Stream rng_;
};

inline CodedPacket encode(const Generation& gen, std::uint64_t seed) {
  return Encoder(gen, seed).next();
}

// Progressive Gauss-Jordan decoder. Rows are kept fully reduced, so a source
// packet is exposed as soon as its row collapses to a unit vector; the
// decoded mask acts as the sliding window over already-recovered packets.
class Decoder {
 public:
  Decoder(std::size_t packet_count, std::size_t packet_len)
      : packet_count_(packet_count),
        packet_len_(packet_len),
        pivot_of_col_(packet_count, kNoPivot),
        decoded_(packet_count, false) {
    if (packet_count == 0 || packet_len == 0) throw std::invalid_argument("rlnc: empty decoder");
  }

  std::size_t rank() const { return rows_.size(); }
  std::size_t packet_count() const { return packet_count_; }
  bool complete() const { return rank() == packet_count_; }
  const std::vector<bool>& decoded_mask() const { return decoded_; }

  // Returns true when the packet was innovative (rank increased by one).
  bool ingest(const CodedPacket& pkt) {
    if (pkt.coeffs.size() != packet_count_ || pkt.payload.size() != packet_len_)
      throw std::invalid_argument("rlnc: malformed coded packet");
    Row row{pkt.coeffs, pkt.payload};

    // Forward-reduce against existing pivots.
    for (std::size_t col = 0; col < packet_count_; ++col) {
      const std::uint8_t c = row.coeffs[col];
      if (c == 0 || pivot_of_col_[col] == kNoPivot) continue;
      subtract_scaled(row, rows_[pivot_of_col_[col]], c);
    }

    std::size_t lead = packet_count_;
    for (std::size_t col = 0; col < packet_count_; ++col)
      if (row.coeffs[col] != 0) { lead = col; break; }
    if (lead == packet_count_) return false;  // linearly dependent

    scale(row, gf::inv(row.coeffs[lead]));

    // Back-eliminate the new pivot column from older rows.
    for (auto& existing : rows_)
      if (const std::uint8_t c = existing.coeffs[lead]; c != 0)
        subtract_scaled(existing, row, c);

    pivot_of_col_[lead] = rows_.size();
    rows_.push_back(std::move(row));
    refresh_decoded_mask();
    return true;
  }

  // Source packet i, available once decoded_mask()[i] is set.
  std::span<const std::uint8_t> packet(std::size_t i) const {
    if (i >= packet_count_ || !decoded_[i])
      throw std::logic_error("rlnc: packet not yet decoded");
    return rows_[pivot_of_col_[i]].payload;
  }

  // Full generation payload, row-major. Requires rank == packet count.
  std::vector<std::uint8_t> decode_generation() const {
    if (!complete())
      throw std::runtime_error("rlnc: insufficient degrees of freedom");
    std::vector<std::uint8_t> out;
    out.reserve(packet_count_ * packet_len_);
    for (std::size_t col = 0; col < packet_count_; ++col) {
      const auto& row = rows_[pivot_of_col_[col]];
      out.insert(out.end(), row.payload.begin(), row.payload.end());
    }
    return out;
  }

 private:
  struct Row {
    std::vector<std::uint8_t> coeffs;
    std::vector<std::uint8_t> payload;
  };
  static constexpr std::size_t kNoPivot = static_cast<std::size_t>(-1);

  static void subtract_scaled(Row& target, const Row& source, std::uint8_t factor) {
    for (std::size_t j = 0; j < target.coeffs.size(); ++j)
      target.coeffs[j] = gf::add(target.coeffs[j], gf::mul(factor, source.coeffs[j]));
    for (std::size_t j = 0; j < target.payload.size(); ++j)
      target.payload[j] = gf::add(target.payload[j], gf::mul(factor, source.payload[j]));
  }
  static void scale(Row& row, std::uint8_t factor) {
    for (auto& c : row.coeffs) c = gf::mul(c, factor);
    for (auto& p : row.payload) p = gf::mul(p, factor);
  }

  void refresh_decoded_mask() {
    for (std::size_t col = 0; col < packet_count_; ++col) {
      if (pivot_of_col_[col] == kNoPivot) { decoded_[col] = false; continue; }
      const auto& row = rows_[pivot_of_col_[col]];
      std::size_t nonzero = 0;
      for (auto c : row.coeffs)
        if (c != 0) ++nonzero;
      decoded_[col] = (nonzero == 1);  // reduced rows have row.coeffs[col] == 1
    }
  }

  std::size_t packet_count_;
  std::size_t packet_len_;
  std::vector<Row> rows_;
  std::vector<std::size_t> pivot_of_col_;
  std::vector<bool> decoded_;
};

}  // namespace owcsim::rlnc
