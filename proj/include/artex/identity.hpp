#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "artex/common.hpp"
#include "artex/ledger.hpp"

namespace artex {

using MemberId = std::string;

enum class DocKind : std::uint8_t { Passport, GovId, DriverLicense, Ssn, Other };
enum class KycStatus : std::uint8_t { Submitted, Approved, Rejected };
enum class MemberStatus : std::uint8_t { Provisional, Full, Suspended };

struct KycRecord {
    std::uint64_t id = 0;
    MemberId member;
    DocKind doc_kind = DocKind::Other;
    Hash32 doc_digest{};  // salted hash; raw document bytes are never retained
    KycStatus status = KycStatus::Submitted;
    std::uint64_t submitted_at = 0;
    std::uint64_t reviewed_at = 0;
};

struct Session {
    std::string token;
    MemberId member;
    std::uint64_t expires_at = 0;
};

struct MemberRecord {
    MemberId id;
    Hash32 password_digest{};
    std::string email;
    MemberStatus status = MemberStatus::Provisional;
    std::vector<std::uint64_t> kyc_records;
    // Wallet ownership claims, private store only. Claims carry no
    // cryptographic proof of control; the exchange trusts its own bookkeeping.
    std::set<Address> claimed_wallets;
};

/// Off-chain membership and session store for the exchange. Nothing in here
/// is ever serialized into a public artifact.
class IdentityService {
public:
    IdentityService(SimClock& clock, Rng rng, std::uint64_t session_ttl_s = 86400,
                    std::string admin_credential = "exchange-admin");

    MemberId register_member(const MemberId& id, const Hash32& password_digest,
                             const std::string& email);
    Session login(const MemberId& id, const Hash32& password_digest);
    const KycRecord& submit_kyc(const std::string& session_token, DocKind kind,
                                std::string_view doc_bytes);
    MemberStatus review_kyc(const std::string& admin_credential, std::uint64_t record_id,
                            bool approve);

    // Resolves a session or throws InvalidSession (unknown or expired).
    const MemberRecord& authenticate(const std::string& session_token) const;
    // Same, plus the Full-membership gate used by listing and bidding paths.
    const MemberRecord& authenticate_full(const std::string& session_token) const;

    const MemberRecord* find(const MemberId& id) const;
    void claim_wallet(const MemberId& id, const Address& wallet);
    const std::map<std::uint64_t, KycRecord>& kyc_store() const { return kyc_; }
    const std::map<MemberId, MemberRecord>& members() const { return members_; }

    static Hash32 digest_password(std::string_view password);

private:
    SimClock* clock_;
    Rng rng_;
    std::uint64_t session_ttl_;
    std::string admin_credential_;
    std::array<std::uint8_t, 16> kyc_salt_{};
    std::uint64_t next_kyc_id_ = 1;
    std::map<MemberId, MemberRecord> members_;
    std::map<std::uint64_t, KycRecord> kyc_;
    std::map<std::string, Session> sessions_;
};

}  // namespace artex
