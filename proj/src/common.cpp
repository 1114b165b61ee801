#include "artex/common.hpp"

namespace artex {

namespace {
constexpr char digits[] = "0123456789abcdef";

int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

bool from_hex(std::string_view hex, std::span<std::uint8_t> out) {
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex.remove_prefix(2);
    if (hex.size() != out.size() * 2) return false;
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return false;
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return true;
}

const char* errc_name(errc c) {
    switch (c) {
        case errc::called_after_setup: return "CalledAfterSetup";
        case errc::insufficient_funds: return "InsufficientFunds";
        case errc::insufficient_gas: return "InsufficientGas";
        case errc::not_owner: return "NotOwner";
        case errc::identity_not_registered: return "IdentityNotRegistered";
        case errc::wrong_standard: return "WrongStandard";
        case errc::not_authorized: return "NotAuthorized";
        case errc::unknown_contract: return "UnknownContract";
        case errc::unknown_address: return "UnknownAddress";
        case errc::unknown_token: return "UnknownToken";
        case errc::invalid_recipient: return "InvalidRecipient";
        case errc::arithmetic_overflow: return "ArithmeticOverflow";
        case errc::duplicate_id: return "DuplicateId";
        case errc::bad_credentials: return "BadCredentials";
        case errc::invalid_session: return "InvalidSession";
        case errc::member_not_full: return "MemberNotFull";
        case errc::missing_disclosure: return "MissingDisclosure";
        case errc::deposit_mismatch: return "DepositMismatch";
        case errc::deposit_timeout: return "DepositTimeout";
        case errc::wrong_state: return "WrongState";
        case errc::auction_closed: return "AuctionClosed";
        case errc::bid_too_low: return "BidTooLow";
        case errc::not_yet_closable: return "NotYetClosable";
        case errc::no_winner: return "NoWinner";
        case errc::not_winner: return "NotWinner";
        case errc::sum_mismatch: return "SumMismatch";
        case errc::unknown_destination: return "UnknownDestination";
        case errc::not_seller: return "NotSeller";
        case errc::empty_wallet_set: return "EmptyWalletSet";
        case errc::treasury_insufficient: return "TreasuryInsufficient";
        case errc::delivery_failed: return "DeliveryFailed";
        case errc::no_record: return "NoRecord";
        case errc::config_invalid: return "ConfigInvalid";
        case errc::scenario_aborted: return "ScenarioAborted";
        case errc::insufficient_funding: return "InsufficientFunding";
    }
    return "UnknownError";
}

}  // namespace artex
