#include "emotrack/record.hpp"

#include <ostream>
#include <tuple>

#include "emotrack/error.hpp"

namespace emotrack {
namespace {

void write_csv_field(std::ostream& out, std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

bool record_less(const ReactionRecord& a, const ReactionRecord& b) {
  return std::tie(a.captured_at, a.record_id) < std::tie(b.captured_at, b.record_id);
}

void ReactionFilter::validate() const {
  if (from && to && !(*from < *to)) {
    throw Error(ErrorCode::kInvalidArgument, "filter window requires from < to");
  }
}

bool ReactionFilter::matches(const ReactionRecord& r) const {
  if (board_id && r.board_id != *board_id) return false;
  if (card_id && r.card_id != *card_id) return false;
  if (member_id && r.member_id != *member_id) return false;
  if (emotions && !emotions->contains(r.emotion)) return false;
  if (from && r.captured_at < *from) return false;
  if (to && !(r.captured_at < *to)) return false;
  if (stage_ids && !stage_ids->contains(r.stage.id)) return false;
  return true;
}

LatestMap latest_per_member(std::span<const ReactionRecord> records) {
  LatestMap latest;
  for (const auto& r : records) {
    auto [it, inserted] = latest.try_emplace({r.member_id, r.emotion}, r);
    if (!inserted && record_less(it->second, r)) it->second = r;
  }
  return latest;
}

nlohmann::ordered_json to_json(const ReactionRecord& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["board_id"] = r.board_id;
  j["card_id"] = r.card_id;
  j["member_id"] = r.member_id;
  j["emotion"] = to_string(r.emotion);
  j["intensity"] = r.intensity.value();
  j["captured_at"] = format_rfc3339(r.captured_at);
  j["stage_id"] = r.stage.id;
  j["stage_name"] = r.stage.name;
  j["schema_version"] = r.schema_version;
  return j;
}

ReactionRecord record_from_json(const nlohmann::json& j) {
  try {
    ReactionRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    r.board_id = j.at("board_id").get<std::string>();
    r.card_id = j.at("card_id").get<std::string>();
    r.member_id = j.at("member_id").get<std::string>();
    r.emotion = parse_kind_or_throw(j.at("emotion").get<std::string>());
    const auto& intensity = j.at("intensity");
    if (!intensity.is_number_integer()) {
      throw Error(ErrorCode::kMalformed, "intensity must be an integer");
    }
    auto value = Intensity::make(intensity.get<std::int64_t>());
    if (!value) throw Error(ErrorCode::kMalformed, "intensity out of range");
    r.intensity = *value;
    auto ts = parse_rfc3339(j.at("captured_at").get<std::string>());
    if (!ts) throw Error(ErrorCode::kMalformed, "bad captured_at");
    r.captured_at = *ts;
    r.stage = {j.at("stage_id").get<std::string>(), j.at("stage_name").get<std::string>()};
    r.schema_version = j.at("schema_version").get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("bad record: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformed, std::string("bad record: ") + e.what());
  }
}

std::optional<ExportFormat> parse_export_format(std::string_view text) {
  if (text == "csv") return ExportFormat::kCsv;
  if (text == "jsonl") return ExportFormat::kJsonl;
  return std::nullopt;
}

void write_export(std::span<const ReactionRecord> records, ExportFormat format, std::ostream& out) {
  if (format == ExportFormat::kJsonl) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
  } else {
    out << kExportHeader << '\n';
    for (const auto& r : records) {
      write_csv_field(out, r.record_id);
      out << ',';
      write_csv_field(out, r.board_id);
      out << ',';
      write_csv_field(out, r.card_id);
      out << ',';
      write_csv_field(out, r.member_id);
      out << ',' << to_string(r.emotion) << ',' << r.intensity.value() << ','
          << format_rfc3339(r.captured_at) << ',';
      write_csv_field(out, r.stage.id);
      out << ',';
      write_csv_field(out, r.stage.name);
      out << ',' << r.schema_version << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "export stream write failed");
}

}  // namespace emotrack
