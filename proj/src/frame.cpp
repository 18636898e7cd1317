#include "mavkit/frame.hpp"

#include "mavkit/crc.hpp"

namespace mavkit {

uint8_t frame_sysid(const Frame& f) {
  return std::visit([](const auto& fr) { return fr.sysid; }, f);
}

uint8_t frame_compid(const Frame& f) {
  return std::visit([](const auto& fr) { return fr.compid; }, f);
}

uint8_t frame_seq(const Frame& f) {
  return std::visit([](const auto& fr) { return fr.seq; }, f);
}

uint32_t frame_msgid(const Frame& f) {
  return std::visit([](const auto& fr) { return static_cast<uint32_t>(fr.msgid); }, f);
}

const Bytes& frame_payload(const Frame& f) {
  return std::visit([](const auto& fr) -> const Bytes& { return fr.payload; }, f);
}

uint16_t frame_crc(const FrameV1& f, uint8_t seed) {
  Crc16X25 acc;
  acc.update(static_cast<uint8_t>(f.payload.size()));
  acc.update(f.seq);
  acc.update(f.sysid);
  acc.update(f.compid);
  acc.update(f.msgid);
  acc.update(f.payload);
  acc.update(seed);
  return acc.value();
}

uint16_t frame_crc(const FrameV2& f, uint8_t seed) {
  Crc16X25 acc;
  acc.update(static_cast<uint8_t>(f.payload.size()));
  acc.update(f.incompat_flags);
  acc.update(f.compat_flags);
  acc.update(f.seq);
  acc.update(f.sysid);
  acc.update(f.compid);
  acc.update(static_cast<uint8_t>(f.msgid & 0xFF));
  acc.update(static_cast<uint8_t>((f.msgid >> 8) & 0xFF));
  acc.update(static_cast<uint8_t>((f.msgid >> 16) & 0xFF));
  acc.update(f.payload);
  acc.update(seed);
  return acc.value();
}

void seal(FrameV1& f, uint8_t seed) {
  if (f.payload.size() > kMaxPayload) throw PayloadTooLong("v1 payload exceeds 255 bytes");
  f.crc = frame_crc(f, seed);
}

void seal(FrameV2& f, uint8_t seed) {
  if (f.payload.size() > kMaxPayload) throw PayloadTooLong("v2 payload exceeds 255 bytes");
  f.crc = frame_crc(f, seed);
}

Bytes to_wire(const FrameV1& f) {
  if (f.payload.size() > kMaxPayload) throw PayloadTooLong("v1 payload exceeds 255 bytes");
  Bytes out;
  out.reserve(kV1Overhead + f.payload.size());
  out.push_back(kStxV1);
  out.push_back(static_cast<uint8_t>(f.payload.size()));
  out.push_back(f.seq);
  out.push_back(f.sysid);
  out.push_back(f.compid);
  out.push_back(f.msgid);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  out.push_back(static_cast<uint8_t>(f.crc & 0xFF));
  out.push_back(static_cast<uint8_t>(f.crc >> 8));
  return out;
}

Bytes wire_stx_to_crc(const FrameV2& f) {
  if (f.payload.size() > kMaxPayload) throw PayloadTooLong("v2 payload exceeds 255 bytes");
  Bytes out;
  out.reserve(kV2Overhead + f.payload.size());
  out.push_back(kStxV2);
  out.push_back(static_cast<uint8_t>(f.payload.size()));
  out.push_back(f.incompat_flags);
  out.push_back(f.compat_flags);
  out.push_back(f.seq);
  out.push_back(f.sysid);
  out.push_back(f.compid);
  out.push_back(static_cast<uint8_t>(f.msgid & 0xFF));
  out.push_back(static_cast<uint8_t>((f.msgid >> 8) & 0xFF));
  out.push_back(static_cast<uint8_t>((f.msgid >> 16) & 0xFF));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  out.push_back(static_cast<uint8_t>(f.crc & 0xFF));
  out.push_back(static_cast<uint8_t>(f.crc >> 8));
  return out;
}

Bytes to_wire(const FrameV2& f) {
  if (f.signature.has_value() != f.is_signed())
    throw FlagSignatureMismatch("signature presence disagrees with incompat bit 0x01");
  Bytes out = wire_stx_to_crc(f);
  if (f.signature) {
    const SignatureBlock& sig = *f.signature;
    out.reserve(out.size() + kSignatureWireLen);
    out.push_back(sig.link_id);
    for (int i = 0; i < 6; ++i)
      out.push_back(static_cast<uint8_t>((sig.timestamp >> (8 * i)) & 0xFF));
    out.insert(out.end(), sig.sig48.begin(), sig.sig48.end());
  }
  return out;
}

Bytes serialize(FrameV1 f, uint8_t seed) {
  seal(f, seed);
  return to_wire(f);
}

Bytes serialize(FrameV2 f, uint8_t seed) {
  seal(f, seed);
  return to_wire(f);
}

Bytes serialize(Frame f, uint8_t seed) {
  return std::visit([seed](auto& fr) { return serialize(std::move(fr), seed); }, f);
}

}  // namespace mavkit
