#pragma once

#include <stdexcept>
#include <string>

namespace artex {

enum class errc {
    // ledger
    called_after_setup,
    insufficient_funds,
    insufficient_gas,
    not_owner,
    identity_not_registered,
    wrong_standard,
    not_authorized,
    unknown_contract,
    unknown_address,
    unknown_token,
    invalid_recipient,
    arithmetic_overflow,
    // identity
    duplicate_id,
    bad_credentials,
    invalid_session,
    member_not_full,
    // exchange
    missing_disclosure,
    deposit_mismatch,
    deposit_timeout,
    wrong_state,
    // auction
    auction_closed,
    bid_too_low,
    not_yet_closable,
    no_winner,
    // settlement
    not_winner,
    sum_mismatch,
    unknown_destination,
    not_seller,
    empty_wallet_set,
    treasury_insufficient,
    delivery_failed,
    no_record,
    // harness
    config_invalid,
    scenario_aborted,
    insufficient_funding,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const { return code_; }

private:
    errc code_;
};

}  // namespace artex
