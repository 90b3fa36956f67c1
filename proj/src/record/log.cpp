#include "teleop/record/log.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <openssl/evp.h>

namespace teleop::record {

using nlohmann::json;

namespace {

std::string to_hex(const unsigned char* data, unsigned int n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < n; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xf]);
  }
  return out;
}

EVP_MD_CTX* md(void* p) { return static_cast<EVP_MD_CTX*>(p); }

}  // namespace

EventHash::EventHash() : ctx_(EVP_MD_CTX_new()) {
  if (!ctx_ || EVP_DigestInit_ex(md(ctx_), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
}

EventHash::~EventHash() { EVP_MD_CTX_free(md(ctx_)); }

void EventHash::add(const world::Event& e) { add_line(world::canonical_line(e)); }

void EventHash::add_line(std::string_view canonical) {
  EVP_DigestUpdate(md(ctx_), canonical.data(), canonical.size());
  EVP_DigestUpdate(md(ctx_), "\n", 1);
}

std::string EventHash::hex() const {
  EVP_MD_CTX* copy = EVP_MD_CTX_new();
  EVP_MD_CTX_copy_ex(copy, md(ctx_));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  EVP_DigestFinal_ex(copy, digest, &n);
  EVP_MD_CTX_free(copy);
  return to_hex(digest, n);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  EVP_Digest(data.data(), data.size(), digest, &n, EVP_sha256(), nullptr);
  return to_hex(digest, n);
}

void Writer::line(const json& j) {
  out_ << j.dump() << '\n';
  out_.flush();
}

void Writer::header(const Header& h) {
  line({{"record", "header"}, {"format", kLogFormat}, {"scenario", h.scenario}, {"world", h.world}});
}

void Writer::command(const CommandRecord& c) {
  json j{{"record", "command"}, {"tick", c.tick},     {"seq", c.seq},
         {"source", c.source},  {"command", c.command}, {"accepted", c.accepted}};
  if (c.client_seq) j["client_seq"] = *c.client_seq;
  line(j);
}

void Writer::event(const world::Event& e) {
  json j = world::to_json(e);
  j["record"] = "event";
  line(j);
}

void Writer::end(const EndRecord& e) { line({{"record", "end"}, {"ticks", e.ticks}, {"hash", e.hash}}); }

Log read_log(std::istream& in) {
  Log log;
  std::string text;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++n;
    if (text.empty()) continue;
    if (log.end) throw CorruptLog(n, "record after the end record");
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw CorruptLog(n, "not a JSON object");
    try {
      const std::string kind = j.at("record").get<std::string>();
      if (!have_header && kind != "header") throw CorruptLog(n, "log must start with a header record");
      if (kind == "header") {
        if (have_header) throw CorruptLog(n, "second header record");
        if (j.at("format").get<std::string>() != kLogFormat) throw CorruptLog(n, "unsupported log format");
        log.header.scenario = j.at("scenario").get<std::string>();
        log.header.world = j.at("world");
        if (!log.header.world.is_object()) throw CorruptLog(n, "header world must be an object");
        have_header = true;
      } else if (kind == "command") {
        CommandRecord c;
        c.tick = j.at("tick").get<std::uint64_t>();
        c.seq = j.at("seq").get<std::uint64_t>();
        c.source = j.at("source").get<std::string>();
        c.command = j.at("command");
        c.accepted = j.at("accepted").get<bool>();
        if (j.contains("client_seq")) c.client_seq = j.at("client_seq").get<std::uint64_t>();
        if (!j.at("tick").is_number_unsigned() || !j.at("seq").is_number_unsigned()) {
          throw CorruptLog(n, "tick and seq must be non-negative integers");
        }
        if (!log.commands.empty() && (c.tick < log.commands.back().tick || c.seq <= log.commands.back().seq)) {
          throw CorruptLog(n, "command records out of order");
        }
        log.commands.push_back(std::move(c));
        log.command_lines.push_back(n);
      } else if (kind == "event") {
        j.erase("record");
        world::Event e = world::event_from_json(j);
        if (!log.events.empty() && (e.seq <= log.events.back().seq || e.tick < log.events.back().tick)) {
          throw CorruptLog(n, "event records out of order");
        }
        log.events.push_back(std::move(e));
        log.event_lines.push_back(n);
      } else if (kind == "end") {
        log.end = EndRecord{j.at("ticks").get<std::uint64_t>(), j.at("hash").get<std::string>()};
        log.end_line = n;
      } else {
        throw CorruptLog(n, "unknown record type '" + kind + "'");
      }
    } catch (const CorruptLog&) {
      throw;
    } catch (const std::exception& e) {
      throw CorruptLog(n, e.what());
    }
  }
  if (!have_header) throw CorruptLog(n, "empty log");
  return log;
}

Log read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open log " + path);
  return read_log(in);
}

}  // namespace teleop::record
