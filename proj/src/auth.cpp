#include "emotrack/auth.hpp"

#include <algorithm>

#include <json.hpp>

#include "emotrack/error.hpp"
#include "emotrack/log.hpp"
#include "crypto.hpp"

namespace emotrack {
namespace {

constexpr std::string_view kHeader = R"({"alg":"HS256","typ":"JWT"})";

}  // namespace

std::string_view to_string(Role role) noexcept {
  return role == Role::kManager ? "manager" : "member";
}

std::string_view to_string(TokenRejection r) noexcept {
  switch (r) {
    case TokenRejection::kMalformed: return "malformed";
    case TokenRejection::kBadSignature: return "bad_signature";
    case TokenRejection::kExpired: return "expired";
  }
  return "malformed";
}

std::string sign_token(const TokenClaims& claims, std::string_view secret) {
  nlohmann::ordered_json payload;
  payload["sub"] = claims.member_id;
  payload["board"] = claims.board_id;
  payload["iat"] = floor_div(claims.issued_at.ms, kMsPerSecond);
  payload["exp"] = floor_div(claims.expires_at.ms, kMsPerSecond);
  std::string signing_input = crypto::base64url_encode(kHeader) + "." + crypto::base64url_encode(payload.dump());
  const std::string sig = crypto::base64url_encode(crypto::hmac_sha256(secret, signing_input));
  return signing_input + "." + sig;
}

TokenResult verify_token(std::string_view raw, std::string_view secret, Timestamp now) {
  const auto dot1 = raw.find('.');
  if (dot1 == std::string_view::npos) return TokenRejection::kMalformed;
  const auto dot2 = raw.find('.', dot1 + 1);
  if (dot2 == std::string_view::npos || raw.find('.', dot2 + 1) != std::string_view::npos) {
    return TokenRejection::kMalformed;
  }
  const std::string_view header_b64 = raw.substr(0, dot1);
  const std::string_view payload_b64 = raw.substr(dot1 + 1, dot2 - dot1 - 1);
  const std::string_view sig_b64 = raw.substr(dot2 + 1);

  auto header = crypto::base64url_decode(header_b64);
  auto payload = crypto::base64url_decode(payload_b64);
  auto sig = crypto::base64url_decode(sig_b64);
  if (!header || !payload || !sig) return TokenRejection::kMalformed;

  const auto header_json = nlohmann::json::parse(*header, nullptr, false);
  if (!header_json.is_object() || header_json.value("alg", "") != "HS256") {
    return TokenRejection::kMalformed;
  }

  const std::string expected = crypto::hmac_sha256(secret, raw.substr(0, dot2));
  if (!crypto::constant_time_equal(*sig, expected)) {
    return TokenRejection::kBadSignature;
  }

  const auto claims = nlohmann::json::parse(*payload, nullptr, false);
  if (!claims.is_object()) return TokenRejection::kMalformed;
  const auto sub = claims.find("sub");
  const auto board = claims.find("board");
  const auto iat = claims.find("iat");
  const auto exp = claims.find("exp");
  if (sub == claims.end() || !sub->is_string() || sub->get<std::string>().empty() ||
      board == claims.end() || !board->is_string() || board->get<std::string>().empty() ||
      iat == claims.end() || !iat->is_number_integer() || exp == claims.end() ||
      !exp->is_number_integer()) {
    return TokenRejection::kMalformed;
  }
  const auto issued = iat->get<std::int64_t>();
  const auto expires = exp->get<std::int64_t>();
  if (expires <= issued) return TokenRejection::kMalformed;
  if (now >= Timestamp::from_seconds(expires)) return TokenRejection::kExpired;

  return Principal{sub->get<std::string>(), board->get<std::string>(), std::nullopt};
}

RoleResolver::RoleResolver(BoardStateProvider& provider, std::chrono::milliseconds ttl, Clock clock)
    : provider_(provider), clock_(std::move(clock)), ttl_(ttl) {}

void RoleResolver::set_ttl(std::chrono::milliseconds ttl) {
  std::lock_guard lock(mu_);
  ttl_ = ttl;
  cache_.clear();
}

Principal RoleResolver::resolve(Principal principal) {
  const auto key = std::make_pair(principal.member_id, principal.board_id);
  const Timestamp now = clock_();
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end() && now.ms - it->second.fetched_at.ms < ttl_.count()) {
      principal.role = it->second.role;
      return principal;
    }
  }

  Role role = Role::kMember;
  try {
    role = provider_.is_admin(principal.member_id, principal.board_id) ? Role::kManager
                                                                        : Role::kMember;
  } catch (const std::exception& e) {
    log_warning(std::string("role lookup failed, treating as member: ") + e.what());
    principal.role = Role::kMember;
    return principal;
  }

  {
    std::lock_guard lock(mu_);
    if (ttl_.count() > 0) cache_[key] = Entry{role, now};
  }
  principal.role = role;
  return principal;
}

std::vector<ReactionRecord> redact(std::vector<ReactionRecord> records, const Principal& principal) {
  std::erase_if(records, [&](const ReactionRecord& r) {
    if (r.board_id != principal.board_id) return true;
    return !principal.is_manager() && r.member_id != principal.member_id;
  });
  return records;
}

}  // namespace emotrack
