#include "mavkit/gcs.hpp"

#include <algorithm>

#include "mavkit/errors.hpp"

namespace mavkit {

std::string_view alert_rule_name(Alert::Rule rule) {
  switch (rule) {
    case Alert::HeartbeatGap: return "HeartbeatGap";
    case Alert::SeqLossSpike: return "SeqLossSpike";
    case Alert::TimestampAnomaly: return "TimestampAnomaly";
    case Alert::FloodRate: return "FloodRate";
  }
  return "?";
}

GcsCore::GcsCore(uint8_t vehicle_sysid, DetectorConfig cfg) : cfg_(cfg) {
  view_.sysid = vehicle_sysid;
}

void GcsCore::note_arrival(double now_s) { arrivals_.push_back(now_s); }

void GcsCore::ingest(const Frame& frame, double now_s) {
  if (frame_sysid(frame) != view_.sysid) return;
  view_.link.update(frame_seq(frame));
  loss_samples_.push_back({now_s, view_.link.received, view_.link.lost});

  const Bytes& payload = frame_payload(frame);
  switch (frame_msgid(frame)) {
    case kMsgHeartbeat: {
      const Heartbeat hb = Heartbeat::decode(payload);
      view_.last_heartbeat_s = now_s;
      view_.custom_mode = hb.custom_mode;
      view_.base_mode = hb.base_mode;
      view_.armed = (hb.base_mode & kBaseArmed) != 0;
      view_.system_status = hb.system_status;
      break;
    }
    case kMsgGlobalPosition: {
      const GlobalPosition p = GlobalPosition::decode(payload);
      view_.lat_deg = gps_raw_to_degrees(p.lat);
      view_.lon_deg = gps_raw_to_degrees(p.lon);
      view_.abs_alt_m = double(p.alt) / 1000.0;
      view_.relative_alt_m = double(p.relative_alt) / 1000.0;
      break;
    }
    case kMsgSysStatus: {
      const SysStatus st = SysStatus::decode(payload);
      view_.battery_pct = double(st.battery_remaining);
      break;
    }
    default:
      break;
  }
}

void GcsCore::note_signing_rejection(VerifyResult reason, double now_s) {
  alerts_.push_back({Alert::TimestampAnomaly, now_s,
                     std::string("signed frame rejected: ") +
                         std::string(verify_result_name(reason))});
}

std::vector<Alert> GcsCore::detector_step(double now_s) {
  std::vector<Alert> fired;

  // HeartbeatGap: only meaningful once we have heard the vehicle at all.
  const double gap_limit = cfg_.heartbeat_gap_factor * cfg_.heartbeat_period_s;
  if (view_.last_heartbeat_s >= 0) {
    const double gap = now_s - view_.last_heartbeat_s;
    if (gap > gap_limit && heartbeat_gap_armed_) {
      heartbeat_gap_armed_ = false;
      fired.push_back({Alert::HeartbeatGap, now_s,
                       "no heartbeat for " + std::to_string(gap) + " s"});
    } else if (gap <= gap_limit) {
      heartbeat_gap_armed_ = true;
    }
  }

  // SeqLossSpike: drop ratio over the sliding window.
  while (!loss_samples_.empty() &&
         loss_samples_.front().t_s < now_s - cfg_.loss_window_s)
    loss_samples_.pop_front();
  if (loss_samples_.size() >= 2) {
    const LossSample& a = loss_samples_.front();
    const LossSample& b = loss_samples_.back();
    const uint64_t recv = b.received - a.received;
    const uint64_t lost = b.lost - a.lost;
    const uint64_t total = recv + lost;
    const double ratio = total == 0 ? 0.0 : double(lost) / double(total);
    if (total >= 5 && ratio > cfg_.loss_ratio_threshold) {
      if (loss_spike_armed_) {
        loss_spike_armed_ = false;
        fired.push_back({Alert::SeqLossSpike, now_s,
                         "drop ratio " + std::to_string(ratio) + " over " +
                             std::to_string(cfg_.loss_window_s) + " s"});
      }
    } else {
      loss_spike_armed_ = true;
    }
  }

  // FloodRate: arrivals per second over the sliding window.
  while (!arrivals_.empty() && arrivals_.front() < now_s - cfg_.flood_window_s)
    arrivals_.pop_front();
  const double rate = double(arrivals_.size()) / cfg_.flood_window_s;
  if (rate > cfg_.flood_rate_fps) {
    if (flood_armed_) {
      flood_armed_ = false;
      fired.push_back({Alert::FloodRate, now_s,
                       std::to_string(rate) + " frames/s"});
    }
  } else {
    flood_armed_ = true;
  }

  alerts_.insert(alerts_.end(), fired.begin(), fired.end());
  return fired;
}

uint64_t GcsCore::alert_count(Alert::Rule rule) const {
  return uint64_t(std::count_if(alerts_.begin(), alerts_.end(),
                                [rule](const Alert& a) { return a.rule == rule; }));
}

GcsActor::GcsActor(Link& link, const Catalog& catalog, EndpointConfig cfg,
                   uint8_t vehicle_sysid, DetectorConfig det)
    : link_(link),
      catalog_(catalog),
      cfg_(cfg),
      vehicle_sysid_(vehicle_sysid),
      parser_(catalog.seed_lookup()),
      core_(vehicle_sysid, det) {
  if (cfg_.signing)
    signing_.emplace(cfg_.key, cfg_.clock, UnsignedPolicy::Reject);
}

void GcsActor::send_payload(uint32_t msgid, const Bytes& payload) {
  const MessageDef* def = catalog_.find(msgid);
  if (!def) return;
  FrameV2 f = make_frame(msgid, payload, seq_, cfg_.sysid, cfg_.compid);
  seq_ = seq_next(seq_);
  ++frames_sent_;
  if (signing_) {
    f = signing_->sign_frame(std::move(f), cfg_.link_id, def->seed());
    link_.send(to_wire(f));
  } else {
    link_.send(serialize(std::move(f), def->seed()));
  }
}

void GcsActor::dispatch(const Frame& frame, double now_s) {
  core_.ingest(frame, now_s);
  if (frame_sysid(frame) != vehicle_sysid_) return;
  const uint32_t msgid = frame_msgid(frame);

  if (msgid == kMsgCommandAck) {
    const CommandAck ack = CommandAck::decode(frame_payload(frame));
    if (phase_ == Phase::Command && awaiting_ack_ &&
        ack.command == pending_cmd_.command) {
      // Matching is by command id only; the confirmation byte is not echoed.
      phase_ = Phase::Idle;
      awaiting_ack_ = false;
      outcome_ = CommandOutcome::Success;
      last_ack_ = ack;
    } else if (phase_ == Phase::Mission && awaiting_ack_ &&
               ack.command == uint16_t(kMsgMissionItem) &&
               ack.result == uint8_t(CmdResult::Accepted)) {
      acked_seqs_.push_back(pending_items_[item_index_].seq);
      ++item_index_;
      if (item_index_ >= pending_items_.size()) {
        phase_ = Phase::Idle;
        awaiting_ack_ = false;
        outcome_ = CommandOutcome::Success;
      } else {
        send_current_mission_item();
        retries_left_ = retries_budget_;  // each item gets a fresh budget
        next_deadline_s_ = now_s + ack_timeout_s_;
      }
    }
  } else if (msgid == kMsgMissionItem) {
    home_reply_ = MissionItem::decode(frame_payload(frame));
  }
}

void GcsActor::step(double now_s) {
  for (const Bytes& chunk : link_.recv()) {
    for (ParsedFrame& pf : parser_.feed(chunk)) {
      core_.note_arrival(now_s);
      if (pf.verdict != CrcVerdict::Ok) continue;
      if (signing_) {
        const auto* v2 = std::get_if<FrameV2>(&pf.frame);
        if (!v2) continue;
        const VerifyResult r = signing_->verify_frame(*v2);
        if (r != VerifyResult::Accept) {
          if (v2->is_signed()) core_.note_signing_rejection(r, now_s);
          continue;
        }
      }
      accepted_.push_back(std::visit([](const auto& f) { return to_wire(f); },
                                     pf.frame));
      try {
        dispatch(pf.frame, now_s);
      } catch (const LengthMismatch&) {
        // CRC-valid frame with a mis-sized payload: ignore.
      }
    }
  }

  // The station announces itself at 1 Hz like any other MAVLink endpoint;
  // over UDP this is also how the vehicle learns where to send telemetry.
  if (now_s >= hb_next_s_) {
    hb_next_s_ = (hb_next_s_ == 0 ? now_s : hb_next_s_) + 1.0;
    Heartbeat hb;
    hb.type = 6;  // operator station, not an airframe from MavType
    hb.autopilot = uint8_t(MavAutopilot::Generic);
    hb.base_mode = 0;
    hb.custom_mode = 0;
    hb.system_status = uint8_t(MavState::Active);
    send_payload(kMsgHeartbeat, hb.encode());
  }

  action_step(now_s);
  core_.detector_step(now_s);
}

void GcsActor::action_step(double now_s) {
  if (phase_ == Phase::Idle || !awaiting_ack_) return;
  if (now_s < next_deadline_s_) return;

  if (retries_left_ <= 0) {
    phase_ = Phase::Idle;
    awaiting_ack_ = false;
    outcome_ = CommandOutcome::Timeout;
    return;
  }
  --retries_left_;
  if (phase_ == Phase::Command) {
    pending_cmd_.confirmation =
        uint8_t(retries_budget_ - retries_left_);  // 0 on first send
    send_payload(kMsgCommandLong, pending_cmd_.encode());
  } else {
    send_current_mission_item();
  }
  next_deadline_s_ = now_s + ack_timeout_s_;
}

void GcsActor::start_command(CommandLong cmd, double now_s, int retries,
                             double ack_timeout_s) {
  if (phase_ != Phase::Idle)
    throw LinkError("a command or upload is already in flight");
  phase_ = Phase::Command;
  outcome_ = CommandOutcome::Pending;
  last_ack_.reset();
  pending_cmd_ = cmd;
  pending_cmd_.confirmation = 0;  // first send always carries 0
  pending_cmd_.target_system = vehicle_sysid_;
  retries_budget_ = retries;
  retries_left_ = retries;
  ack_timeout_s_ = ack_timeout_s;
  awaiting_ack_ = true;
  send_payload(kMsgCommandLong, pending_cmd_.encode());
  next_deadline_s_ = now_s + ack_timeout_s_;
}

void GcsActor::start_mission_upload(std::vector<MissionItem> items,
                                    double now_s, int retries,
                                    double ack_timeout_s) {
  if (phase_ != Phase::Idle)
    throw LinkError("a command or upload is already in flight");
  if (items.empty() || items[0].seq != 0)
    throw NonContiguousSeq("mission must start with the home item (seq 0)");
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].seq != i)
      throw NonContiguousSeq("mission seq " + std::to_string(items[i].seq) +
                             " at position " + std::to_string(i));
  phase_ = Phase::Mission;
  outcome_ = CommandOutcome::Pending;
  pending_items_ = std::move(items);
  item_index_ = 0;
  acked_seqs_.clear();
  retries_budget_ = retries;
  retries_left_ = retries;
  ack_timeout_s_ = ack_timeout_s;
  awaiting_ack_ = true;
  send_current_mission_item();
  next_deadline_s_ = now_s + ack_timeout_s_;
}

void GcsActor::send_current_mission_item() {
  MissionItem item = pending_items_[item_index_];
  item.target_system = vehicle_sysid_;
  send_payload(kMsgMissionItem, item.encode());
  awaiting_ack_ = true;
}

}  // namespace mavkit
