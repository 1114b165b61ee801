#include <doctest.h>

#include <json.hpp>

#include "world.hpp"

using namespace artex;
using testworld::World;

TEST_CASE("listing requires full membership and complete disclosure") {
    World w;
    auto seller = w.full_member("m-seller", 0);
    Address contract = w.deploy_nft(seller, 1);
    w.settle();

    SUBCASE("provisional members cannot list") {
        std::string prov = w.provisional_member("m-prov");
        try {
            w.exchange.create_listing(prov, TokenRef{contract, 1, 1}, testworld::nft_disclosure());
            FAIL("expected MemberNotFull");
        } catch (const error& e) {
            CHECK(e.code() == errc::member_not_full);
        }
    }
    SUBCASE("missing token standard") {
        Disclosure d;  // nothing filled in
        try {
            w.exchange.create_listing(seller.session, TokenRef{contract, 1, 1}, d);
            FAIL("expected MissingDisclosure");
        } catch (const error& e) {
            CHECK(e.code() == errc::missing_disclosure);
        }
    }
    SUBCASE("non-fungible listings force token_amount to one") {
        Disclosure d = testworld::nft_disclosure();
        d.token_amount = 50;  // ignored
        auto id = w.exchange.create_listing(seller.session, TokenRef{contract, 1, 1}, d);
        CHECK(*w.exchange.listing(id).disclosure.token_amount == 1);
    }
    SUBCASE("concurrent listings get distinct intake wallets") {
        Address c2 = w.deploy_nft(seller, 2);
        auto id1 = w.exchange.create_listing(seller.session, TokenRef{contract, 1, 1},
                                             testworld::nft_disclosure());
        auto id2 = w.exchange.create_listing(seller.session, TokenRef{c2, 2, 1},
                                             testworld::nft_disclosure());
        CHECK(w.exchange.listing(id1).intake.address() != w.exchange.listing(id2).intake.address());
    }
}

TEST_CASE("deposit confirmation") {
    World w;
    auto seller = w.full_member("m-seller", 0);
    Address contract = w.deploy_nft(seller, 1);
    Address other = w.deploy_nft(seller, 9);
    w.settle();
    auto id = w.exchange.create_listing(seller.session, TokenRef{contract, 1, 1},
                                        testworld::nft_disclosure());
    const Listing& l = w.exchange.listing(id);

    SUBCASE("wrong token deposited: mismatch, state unchanged") {
        w.ledger.transfer_token(seller.wallet, other, 9, 1, l.intake.address(), 0);
        w.settle();
        try {
            w.exchange.confirm_deposit(id);
            FAIL("expected DepositMismatch");
        } catch (const error& e) {
            CHECK(e.code() == errc::deposit_mismatch);
        }
        CHECK(w.exchange.listing(id).state == ListingState::AwaitingDeposit);
    }
    SUBCASE("partial fungible amount is a mismatch, the exact amount confirms") {
        TokenInit init;
        init.fungible_holdings[seller.wallet.address] = 100;
        Address fungible = w.ledger.deploy_token(seller.wallet, TokenStandard::Fungible, init).address;
        w.settle();
        Disclosure d;
        d.token_standard = TokenStandard::Fungible;
        auto fid = w.exchange.create_listing(seller.session, TokenRef{fungible, std::nullopt, 10}, d);
        w.ledger.transfer_token(seller.wallet, fungible, std::nullopt, 5,
                                w.exchange.listing(fid).intake.address(), 0);
        w.settle();
        CHECK_THROWS_AS(w.exchange.confirm_deposit(fid), error);
        w.ledger.transfer_token(seller.wallet, fungible, std::nullopt, 10,
                                w.exchange.listing(fid).intake.address(), 0);
        w.settle();
        w.exchange.confirm_deposit(fid);
        CHECK(w.exchange.listing(fid).state == ListingState::UnderReview);
        CHECK(w.exchange.review_listing(fid) == ListingState::Listed);
    }
    SUBCASE("correct deposit: custody moves with zero attached value") {
        w.ledger.transfer_token(seller.wallet, contract, 1, 1, l.intake.address(), 0);
        w.settle();
        w.exchange.confirm_deposit(id);
        CHECK(w.exchange.listing(id).state == ListingState::UnderReview);
        CHECK(w.ledger.view().token_owner(contract, 1) == l.intake.address());
        for (const auto& tx : w.ledger.view().token_history(contract, 1))
            CHECK(tx.value == 0);
    }
    SUBCASE("deposit after the deadline is refused") {
        w.clock.now += 8 * 86400;
        w.ledger.transfer_token(seller.wallet, contract, 1, 1, l.intake.address(), 0);
        w.ledger.seal_block();
        try {
            w.exchange.confirm_deposit(id);
            FAIL("expected DepositTimeout");
        } catch (const error& e) {
            CHECK(e.code() == errc::deposit_timeout);
        }
        w.exchange.pump();  // deadline passes, listing closes
        CHECK(w.exchange.listing(id).state == ListingState::Rejected);
    }
}

namespace {
std::uint64_t listed_listing(World& w, const testworld::Member& seller, Address contract,
                             std::uint64_t token_id) {
    auto id = w.exchange.create_listing(seller.session, TokenRef{contract, token_id, 1},
                                        testworld::nft_disclosure());
    w.ledger.transfer_token(seller.wallet, contract, token_id, 1,
                            w.exchange.listing(id).intake.address(), 0);
    w.settle();
    w.exchange.confirm_deposit(id);
    w.exchange.review_listing(id);
    return id;
}
}  // namespace

TEST_CASE("compliance review") {
    SUBCASE("blacklisted contract is rejected and the token returned") {
        // contract addresses are deterministic per seed: discover, then rebuild
        Address bad;
        {
            World probe;
            auto s = probe.full_member("m-seller", 0);
            bad = probe.deploy_nft(s, 1);
        }
        ExchangeConfig cfg;
        cfg.contract_blacklist.insert(bad);
        World w(0, cfg);
        auto seller = w.full_member("m-seller", 0);
        Address contract = w.deploy_nft(seller, 1);
        REQUIRE(contract == bad);
        w.settle();
        auto id = w.exchange.create_listing(seller.session, TokenRef{contract, 1, 1},
                                            testworld::nft_disclosure());
        w.ledger.transfer_token(seller.wallet, contract, 1, 1,
                                w.exchange.listing(id).intake.address(), 0);
        w.settle();
        w.exchange.confirm_deposit(id);
        CHECK(w.exchange.review_listing(id) == ListingState::Rejected);
        w.settle();
        CHECK(w.exchange.listing(id).state == ListingState::Returned);
        CHECK(w.ledger.view().token_owner(contract, 1) == seller.wallet.address);
    }
    SUBCASE("declared standard must match the ledger contract") {
        World w;
        auto seller = w.full_member("m-seller", 0);
        Address contract = w.deploy_nft(seller, 1);  // plain non-fungible
        w.settle();
        Disclosure d = testworld::nft_disclosure(TokenStandard::Rwa3643);  // declared wrongly
        auto id = w.exchange.create_listing(seller.session, TokenRef{contract, 1, 1}, d);
        w.ledger.transfer_token(seller.wallet, contract, 1, 1,
                                w.exchange.listing(id).intake.address(), 0);
        w.settle();
        w.exchange.confirm_deposit(id);
        CHECK(w.exchange.review_listing(id) == ListingState::Rejected);
    }
    SUBCASE("well-formed listing goes live") {
        World w;
        auto seller = w.full_member("m-seller", 0);
        Address contract = w.deploy_nft(seller, 1);
        w.settle();
        auto id = listed_listing(w, seller, contract, 1);
        CHECK(w.exchange.listing(id).state == ListingState::Listed);
    }
}

TEST_CASE("auction through the exchange") {
    World w;
    auto seller = w.full_member("m-seller", 0);
    auto b1 = w.full_member("m-b1", 0);
    auto b2 = w.full_member("m-b2", 0);
    Address contract = w.deploy_nft(seller, 1);
    w.settle();
    auto id = listed_listing(w, seller, contract, 1);

    SUBCASE("cannot open an auction twice") {
        w.exchange.open_auction(id, 3600);
        CHECK_THROWS_AS(w.exchange.open_auction(id, 3600), error);
    }
    SUBCASE("window bookkeeping") {
        w.exchange.open_auction(id, 3600);
        CHECK(w.exchange.auction(id).closes_at == w.exchange.auction(id).opens_at + 3600);
    }
    SUBCASE("bidding leaves no ledger footprint") {
        w.exchange.open_auction(id, 3600);
        std::uint64_t before = w.ledger.transaction_count();
        w.exchange.place_bid(b1.session, id, 100);
        w.exchange.place_bid(b2.session, id, 200);
        CHECK(w.ledger.transaction_count() == before);
    }
    SUBCASE("no bids routes to return") {
        w.exchange.open_auction(id, 3600);
        w.clock.now += 3600;
        CHECK(!w.exchange.close_auction(id));
        w.settle();
        CHECK(w.exchange.listing(id).state == ListingState::Returned);
        CHECK(w.ledger.view().token_owner(contract, 1) == seller.wallet.address);
        // after the return the exchange holds nothing
        CHECK(w.exchange.wallet_roles().count(w.ledger.view().token_owner(contract, 1)) == 0);
    }
    SUBCASE("notifications carry the minimum") {
        w.exchange.open_auction(id, 3600);
        w.exchange.place_bid(b1.session, id, 100);
        w.exchange.place_bid(b2.session, id, 200);
        w.clock.now += 3600;
        auto outcome = w.exchange.close_auction(id);
        REQUIRE(outcome);
        CHECK(outcome->winner == "m-b2");
        w.exchange.notify_results(id, 3);

        // seller: price only, no counterparty
        const auto& seller_box = w.exchange.inbox("m-seller");
        REQUIRE(!seller_box.empty());
        CHECK(seller_box.back().kind == NotificationKind::AuctionEndedSeller);
        CHECK(*seller_box.back().final_price == 200);
        CHECK(seller_box.back().payment_addresses.empty());

        // winner: price, options, and the three requested addresses
        const auto& buyer_box = w.exchange.inbox("m-b2");
        REQUIRE(buyer_box.size() >= 2);
        CHECK(buyer_box[buyer_box.size() - 2].kind == NotificationKind::AuctionWonBuyer);
        CHECK(buyer_box.back().kind == NotificationKind::PaymentAddresses);
        CHECK(buyer_box.back().payment_addresses.size() == 3);

        // loser: the bare fact the auction ended
        const auto& loser_box = w.exchange.inbox("m-b1");
        REQUIRE(!loser_box.empty());
        CHECK(loser_box.back().kind == NotificationKind::AuctionEndedOther);
        CHECK(!loser_box.back().final_price.has_value());
        CHECK(loser_box.back().payment_addresses.empty());
    }
}

TEST_CASE("transition log is always legal") {
    World w;
    auto seller = w.full_member("m-seller", 0);
    auto buyer = w.full_member("m-buyer", 1000);
    Address contract = w.deploy_nft(seller, 1);
    w.settle();
    auto id = listed_listing(w, seller, contract, 1);
    w.exchange.open_auction(id, 3600);
    w.exchange.place_bid(buyer.session, id, 500);
    w.clock.now += 3600;
    w.exchange.close_auction(id);
    w.exchange.notify_results(id, 1);

    for (const auto& tr : w.exchange.transition_log())
        CHECK(listing_transition_legal(tr.from, tr.to));

    // direct illegal calls are refused
    CHECK_THROWS_AS(w.exchange.review_listing(id), error);
    CHECK_THROWS_AS(w.exchange.confirm_deposit(id), error);
}

TEST_CASE("custody stays with exchange wallets while a listing is live") {
    World w;
    auto seller = w.full_member("m-seller", 0);
    auto buyer = w.full_member("m-buyer", 1000);
    Address contract = w.deploy_nft(seller, 1);
    w.settle();
    auto id = listed_listing(w, seller, contract, 1);
    auto owned_by_exchange = [&] {
        Address owner = w.ledger.view().token_owner(contract, 1);
        return w.exchange.wallet_roles().count(owner) == 1;
    };
    CHECK(owned_by_exchange());  // Listed
    w.exchange.open_auction(id, 3600);
    CHECK(owned_by_exchange());  // InAuction
    w.exchange.place_bid(buyer.session, id, 500);
    w.clock.now += 3600;
    w.exchange.close_auction(id);
    CHECK(owned_by_exchange());  // AuctionEnded
    w.exchange.notify_results(id, 1);
    CHECK(owned_by_exchange());  // AwaitingPayment
}

TEST_CASE("disclosure export carries exactly the disclosure fields") {
    World w;
    auto seller = w.full_member("m-seller", 0);
    Address contract = w.deploy_nft(seller, 1);
    w.settle();
    Disclosure d = testworld::nft_disclosure();
    d.creator = "pseudonymous-artist";
    d.image_url = "https://example.test/artwork.png";
    auto id = w.exchange.create_listing(seller.session, TokenRef{contract, 1, 1}, d);

    auto j = nlohmann::json::parse(disclosure_to_json(w.exchange.listing(id).disclosure));
    std::set<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
    CHECK(keys == std::set<std::string>{"token_contract", "token_id", "token_standard",
                                        "token_amount", "token_info", "creator", "image_url"});
    // no member wallet addresses beyond the contract itself
    std::string text = j.dump();
    CHECK(text.find(seller.wallet.address.hex()) == std::string::npos);
    CHECK(text.find(w.exchange.listing(id).intake.address().hex()) == std::string::npos);
}
