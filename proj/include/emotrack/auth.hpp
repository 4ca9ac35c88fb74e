#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "emotrack/provider.hpp"
#include "emotrack/record.hpp"
#include "emotrack/time.hpp"

namespace emotrack {

enum class Role { kMember, kManager };

std::string_view to_string(Role role) noexcept;

struct Principal {
  std::string member_id;
  std::string board_id;
  std::optional<Role> role;  // unset until resolve_role

  bool is_manager() const { return role == Role::kManager; }

  friend bool operator==(const Principal&, const Principal&) = default;
};

struct TokenClaims {
  std::string member_id;
  std::string board_id;
  Timestamp issued_at;
  Timestamp expires_at;
};

// HS256 JSON Web Token: base64url(header).base64url(payload).base64url(hmac).
// Claims: sub = member id, board = board id, iat/exp in whole seconds.
std::string sign_token(const TokenClaims& claims, std::string_view secret);

enum class TokenRejection { kMalformed, kBadSignature, kExpired };

std::string_view to_string(TokenRejection r) noexcept;

using TokenResult = std::variant<Principal, TokenRejection>;

TokenResult verify_token(std::string_view raw, std::string_view secret, Timestamp now);

// Resolves member/manager from the provider's admin flag. Answers are cached
// per (member, board) for `ttl`; a provider failure yields kMember and is not
// cached.
class RoleResolver {
 public:
  RoleResolver(BoardStateProvider& provider, std::chrono::milliseconds ttl, Clock clock);

  Principal resolve(Principal principal);

  void set_ttl(std::chrono::milliseconds ttl);

 private:
  struct Entry {
    Role role;
    Timestamp fetched_at;
  };

  BoardStateProvider& provider_;
  Clock clock_;
  std::mutex mu_;
  std::chrono::milliseconds ttl_;
  std::map<std::pair<std::string, std::string>, Entry> cache_;
};

// Visibility policy for raw records: managers see everything on their board,
// members only their own records.
std::vector<ReactionRecord> redact(std::vector<ReactionRecord> records, const Principal& principal);

}  // namespace emotrack
