#include "artex/identity.hpp"

#include "artex/sha256.hpp"

namespace artex {

IdentityService::IdentityService(SimClock& clock, Rng rng, std::uint64_t session_ttl_s,
                                 std::string admin_credential)
    : clock_(&clock), rng_(rng), session_ttl_(session_ttl_s),
      admin_credential_(std::move(admin_credential)) {
    rng_.fill(kyc_salt_);
}

Hash32 IdentityService::digest_password(std::string_view password) {
    return sha256(password);
}

MemberId IdentityService::register_member(const MemberId& id, const Hash32& password_digest,
                                          const std::string& email) {
    if (members_.count(id)) throw error(errc::duplicate_id, "member id already registered");
    MemberRecord m;
    m.id = id;
    m.password_digest = password_digest;
    m.email = email;
    members_.emplace(id, std::move(m));
    return id;
}

Session IdentityService::login(const MemberId& id, const Hash32& password_digest) {
    auto it = members_.find(id);
    if (it == members_.end() || it->second.password_digest != password_digest)
        throw error(errc::bad_credentials, "unknown id or wrong password");
    Session s;
    std::array<std::uint8_t, 16> raw{};
    rng_.fill(raw);
    s.token = to_hex(raw);
    s.member = id;
    s.expires_at = clock_->now + session_ttl_;
    sessions_[s.token] = s;
    return s;
}

const MemberRecord& IdentityService::authenticate(const std::string& session_token) const {
    auto it = sessions_.find(session_token);
    if (it == sessions_.end()) throw error(errc::invalid_session, "unknown session token");
    if (clock_->now >= it->second.expires_at)
        throw error(errc::invalid_session, "session expired");
    return members_.at(it->second.member);
}

const MemberRecord& IdentityService::authenticate_full(const std::string& session_token) const {
    const MemberRecord& m = authenticate(session_token);
    if (m.status != MemberStatus::Full)
        throw error(errc::member_not_full, "member has not completed KYC review");
    return m;
}

const KycRecord& IdentityService::submit_kyc(const std::string& session_token, DocKind kind,
                                             std::string_view doc_bytes) {
    const MemberRecord& m = authenticate(session_token);
    KycRecord r;
    r.id = next_kyc_id_++;
    r.member = m.id;
    r.doc_kind = kind;
    HashWriter w;
    w.bytes(kyc_salt_);
    w.str(std::string(doc_bytes));
    r.doc_digest = w.digest();
    r.submitted_at = clock_->now;
    members_.at(m.id).kyc_records.push_back(r.id);
    auto [it, ok] = kyc_.emplace(r.id, std::move(r));
    (void)ok;
    return it->second;
}

MemberStatus IdentityService::review_kyc(const std::string& admin_credential,
                                         std::uint64_t record_id, bool approve) {
    if (admin_credential != admin_credential_)
        throw error(errc::not_authorized, "not an exchange admin");
    auto it = kyc_.find(record_id);
    if (it == kyc_.end()) throw error(errc::no_record, "unknown kyc record");
    if (it->second.status != KycStatus::Submitted)
        throw error(errc::wrong_state, "kyc record already reviewed");
    it->second.status = approve ? KycStatus::Approved : KycStatus::Rejected;
    it->second.reviewed_at = clock_->now;
    MemberRecord& m = members_.at(it->second.member);
    if (approve) m.status = MemberStatus::Full;
    return m.status;
}

const MemberRecord* IdentityService::find(const MemberId& id) const {
    auto it = members_.find(id);
    return it == members_.end() ? nullptr : &it->second;
}

void IdentityService::claim_wallet(const MemberId& id, const Address& wallet) {
    auto it = members_.find(id);
    if (it == members_.end()) throw error(errc::unknown_address, "unknown member");
    it->second.claimed_wallets.insert(wallet);
}

}  // namespace artex
