#include <doctest.h>

#include <set>

#include "artex/ledger.hpp"
#include "artex/sha256.hpp"
#include "oracles.hpp"

using namespace artex;

namespace {

struct World {
    SimClock clock;
    Rng rng{42};
    Ledger ledger{clock, 0};
};

KeyPair funded(World& w, Amount amount) {
    KeyPair kp = w.ledger.create_account(w.rng);
    w.ledger.genesis_fund(kp.address, amount);
    return kp;
}

}  // namespace

TEST_CASE("sha256 matches the published test vectors") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("accounts are unique and deterministic per seed") {
    SimClock c1, c2;
    Ledger l1(c1), l2(c2);
    Rng r1(7), r2(7);
    KeyPair a = l1.create_account(r1);
    KeyPair b = l1.create_account(r1);
    CHECK(a.address != b.address);

    KeyPair a2 = l2.create_account(r2);
    KeyPair b2 = l2.create_account(r2);
    CHECK(a.address == a2.address);
    CHECK(b.address == b2.address);
    CHECK(a.priv == a2.priv);
}

TEST_CASE("fresh address has an empty public history") {
    World w;
    KeyPair kp = w.ledger.create_account(w.rng);
    w.ledger.seal_block();
    CHECK(w.ledger.view().address_history(kp.address).empty());
}

TEST_CASE("genesis funding") {
    World w;
    KeyPair a = w.ledger.create_account(w.rng);

    SUBCASE("zero amount still records a transaction") {
        w.ledger.genesis_fund(a.address, 0);
        CHECK(w.ledger.balance(a.address) == 0);
        w.ledger.seal_block();
        CHECK(w.ledger.view().address_history(a.address).size() == 1);
    }
    SUBCASE("funds land") {
        w.ledger.genesis_fund(a.address, 100);
        CHECK(w.ledger.balance(a.address) == 100);
    }
    SUBCASE("total supply equals the sum of the genesis list") {
        Amount expect = 0;
        for (Amount v : {5u, 17u, 0u, 40u}) {
            KeyPair kp = w.ledger.create_account(w.rng);
            w.ledger.genesis_fund(kp.address, v);
            expect += v;
        }
        w.ledger.seal_block();
        auto folded = oracles::fold_dump(w.ledger.dump_ndjson());
        CHECK(folded.minted_native == static_cast<long long>(expect));
        CHECK(w.ledger.genesis_total() == expect);
    }
    SUBCASE("rejected after the first sealed block") {
        w.ledger.seal_block();
        CHECK_THROWS_AS(w.ledger.genesis_fund(a.address, 1), error);
        try {
            w.ledger.genesis_fund(a.address, 1);
        } catch (const error& e) {
            CHECK(e.code() == errc::called_after_setup);
        }
    }
}

TEST_CASE("native transfers") {
    World w;
    KeyPair a = funded(w, 100);
    KeyPair b = funded(w, 0);
    w.ledger.seal_block();

    SUBCASE("full balance with zero gas empties the account") {
        w.ledger.transfer_native(a, b.address, 100);
        CHECK(w.ledger.balance(a.address) == 0);
        CHECK(w.ledger.balance(b.address) == 100);
    }
    SUBCASE("round trip restores both balances") {
        w.ledger.transfer_native(a, b.address, 50);
        w.ledger.transfer_native(b, a.address, 50);
        CHECK(w.ledger.balance(a.address) == 100);
        CHECK(w.ledger.balance(b.address) == 0);
    }
    SUBCASE("insufficient funds") {
        CHECK_THROWS_AS(w.ledger.transfer_native(a, b.address, 101), error);
    }
}

TEST_CASE("random transfers conserve supply including the gas sink") {
    SimClock clock;
    Ledger ledger(clock, 7);  // nonzero gas so the sink matters
    Rng rng(99);
    std::vector<KeyPair> wallets;
    for (int i = 0; i < 5; ++i) {
        wallets.push_back(ledger.create_account(rng));
        ledger.genesis_fund(wallets.back().address, 10'000);
    }
    ledger.seal_block();
    for (int i = 0; i < 10; ++i) {
        std::size_t s = rng.range(0, 4), d = rng.range(0, 4);
        if (s == d) d = (d + 1) % 5;
        Amount amount = rng.range(1, 500);
        ledger.transfer_native(wallets[s], wallets[d].address, amount);
        ledger.advance_time(10);
        ledger.seal_block();
    }
    std::string dump = ledger.dump_ndjson();
    for (std::uint64_t h = 1; h <= ledger.height(); ++h)
        CHECK(oracles::conservation_holds(dump, h));
}

TEST_CASE("token contracts") {
    World w;
    KeyPair issuer = funded(w, 1000);
    KeyPair other = funded(w, 1000);
    w.ledger.seal_block();

    SUBCASE("nft ownership at deployment") {
        TokenInit init;
        init.nft_holders[1] = issuer.address;
        const TokenContract& c = w.ledger.deploy_token(issuer, TokenStandard::NonFungible, init);
        CHECK(c.nft_owner.at(1) == issuer.address);
        w.ledger.seal_block();
        CHECK(w.ledger.view().token_owner(c.address, 1) == issuer.address);
    }
    SUBCASE("fungible supply is constant under transfers") {
        TokenInit init;
        init.fungible_holdings[issuer.address] = 1000;
        const TokenContract& c = w.ledger.deploy_token(issuer, TokenStandard::Fungible, init);
        Address contract = c.address;
        w.ledger.seal_block();
        Rng mix(3);
        for (int i = 0; i < 6; ++i) {
            Amount part = mix.range(1, 50);
            w.ledger.transfer_token(issuer, contract, std::nullopt, part, other.address, 0);
            w.ledger.seal_block();
        }
        // sweep every holder at every block
        std::string dump = w.ledger.dump_ndjson();
        for (std::uint64_t h = 2; h <= w.ledger.height(); ++h) {
            auto folded = oracles::fold_dump(dump, h);
            long long total = 0;
            for (const auto& [holder, bal] : folded.fungible[contract.hex()]) {
                CHECK(bal >= 0);
                total += bal;
            }
            CHECK(total == 1000);
        }
    }
    SUBCASE("nft custody trace is exactly the transfer chain") {
        TokenInit init;
        init.nft_holders[7] = issuer.address;
        const TokenContract& c = w.ledger.deploy_token(issuer, TokenStandard::NonFungible, init);
        Address contract = c.address;
        // zero-gas world: intermediate holders need no native funds
        KeyPair x = w.ledger.create_account(w.rng);
        KeyPair y = w.ledger.create_account(w.rng);
        w.ledger.transfer_token(issuer, contract, 7, 1, x.address, 0);
        w.ledger.transfer_token(x, contract, 7, 1, y.address, 0);
        w.ledger.seal_block();
        auto hist = w.ledger.view().token_history(contract, 7);
        REQUIRE(hist.size() == 3);  // mint + two hops
        CHECK(hist[0].from.is_zero());
        CHECK(hist[1].from == issuer.address);
        CHECK(hist[1].to == x.address);
        CHECK(hist[2].from == x.address);
        CHECK(hist[2].to == y.address);
    }
    SUBCASE("token transfer with zero attached value moves no native balance") {
        TokenInit init;
        init.nft_holders[1] = issuer.address;
        const TokenContract& c = w.ledger.deploy_token(issuer, TokenStandard::NonFungible, init);
        Amount before_from = w.ledger.balance(issuer.address);
        Amount before_to = w.ledger.balance(other.address);
        w.ledger.transfer_token(issuer, c.address, 1, 1, other.address, 0);
        CHECK(w.ledger.balance(issuer.address) == before_from);
        CHECK(w.ledger.balance(other.address) == before_to);
    }
    SUBCASE("not the owner") {
        TokenInit init;
        init.nft_holders[1] = issuer.address;
        const TokenContract& c = w.ledger.deploy_token(issuer, TokenStandard::NonFungible, init);
        CHECK_THROWS_AS(w.ledger.transfer_token(other, c.address, 1, 1, other.address, 0), error);
    }
}

TEST_CASE("permissioned token registry") {
    World w;
    KeyPair issuer = funded(w, 1000);
    KeyPair agent = funded(w, 1000);
    KeyPair stranger = funded(w, 1000);
    TokenInit init;
    init.nft_holders[1] = issuer.address;
    init.registry_agents.push_back(agent.address);
    const TokenContract& c = w.ledger.deploy_token(issuer, TokenStandard::Rwa3643, init);
    Address contract = c.address;
    KeyPair target = w.ledger.create_account(w.rng);
    w.ledger.seal_block();

    SUBCASE("transfer to an unregistered wallet is refused") {
        try {
            w.ledger.transfer_token(issuer, contract, 1, 1, target.address, 0);
            FAIL("expected IdentityNotRegistered");
        } catch (const error& e) {
            CHECK(e.code() == errc::identity_not_registered);
        }
    }
    SUBCASE("registration enables the transfer and is idempotent") {
        Hash32 claim = sha256("claim-1");
        w.ledger.register_identity(contract, agent, target.address, claim);
        w.ledger.register_identity(contract, agent, target.address, claim);
        w.ledger.seal_block();
        CHECK(w.ledger.contract(contract).identity_registry.size() == 2);  // issuer + target
        CHECK(w.ledger.view().registered_addresses(contract).count(target.address) == 1);
        w.ledger.transfer_token(issuer, contract, 1, 1, target.address, 0);
        w.ledger.seal_block();
        CHECK(w.ledger.view().token_owner(contract, 1) == target.address);
    }
    SUBCASE("only the issuer or a trusted agent may register") {
        try {
            w.ledger.register_identity(contract, stranger, target.address, sha256("x"));
            FAIL("expected NotAuthorized");
        } catch (const error& e) {
            CHECK(e.code() == errc::not_authorized);
        }
    }
    SUBCASE("wrong standard") {
        TokenInit fi;
        fi.fungible_holdings[issuer.address] = 10;
        const TokenContract& f = w.ledger.deploy_token(issuer, TokenStandard::Fungible, fi);
        try {
            w.ledger.register_identity(f.address, issuer, target.address, sha256("x"));
            FAIL("expected WrongStandard");
        } catch (const error& e) {
            CHECK(e.code() == errc::wrong_standard);
        }
    }
    SUBCASE("every historical holder appears in the registry") {
        Hash32 claim = sha256("claim-2");
        w.ledger.register_identity(contract, issuer, target.address, claim);
        w.ledger.transfer_token(issuer, contract, 1, 1, target.address, 0);
        w.ledger.seal_block();
        const auto& reg = w.ledger.contract(contract).identity_registry;
        for (const auto& tx : w.ledger.view().token_history(contract, 1)) {
            if (!tx.from.is_zero()) CHECK(reg.count(tx.from) == 1);
            CHECK(reg.count(tx.to) == 1);
        }
    }
}

TEST_CASE("blocks and time") {
    World w;
    KeyPair a = funded(w, 100);
    KeyPair b = w.ledger.create_account(w.rng);
    w.ledger.seal_block();

    SUBCASE("empty block still increments the height") {
        std::uint64_t h = w.ledger.height();
        w.ledger.seal_block();
        CHECK(w.ledger.height() == h + 1);
        CHECK(w.ledger.blocks().back().txs.empty());
    }
    SUBCASE("transactions submitted before a seal share the block height") {
        w.ledger.transfer_native(a, b.address, 1);
        w.ledger.transfer_native(a, b.address, 2);
        std::uint64_t h = w.ledger.seal_block();
        for (const auto& tx : w.ledger.blocks().back().txs) CHECK(tx.block_height == h);
    }
    SUBCASE("timestamps never decrease across blocks") {
        for (int i = 0; i < 5; ++i) {
            w.ledger.advance_time(i % 2 == 0 ? 10 : 0);
            w.ledger.seal_block();
        }
        std::uint64_t last = 0;
        for (const auto& blk : w.ledger.blocks()) {
            CHECK(blk.timestamp >= last);
            last = blk.timestamp;
        }
    }
}

TEST_CASE("explorer queries") {
    World w;
    KeyPair a = funded(w, 100);
    KeyPair b = funded(w, 100);
    KeyPair c = funded(w, 100);
    w.ledger.seal_block();
    w.ledger.transfer_native(a, b.address, 10);
    w.ledger.transfer_native(b, c.address, 5);
    w.ledger.seal_block();

    SUBCASE("union of address histories covers the whole transaction set") {
        std::set<std::string> all;
        for (const auto& blk : w.ledger.blocks())
            for (const auto& tx : blk.txs) all.insert(tx.hash);
        std::set<std::string> seen;
        for (const auto& kp : {a, b, c})
            for (const auto& tx : w.ledger.view().address_history(kp.address)) seen.insert(tx.hash);
        for (const auto& tx : w.ledger.view().address_history(Address::zero())) seen.insert(tx.hash);
        CHECK(seen == all);
    }
    SUBCASE("unknown contract is an error, empty address history is not") {
        Address nowhere;
        nowhere.bytes[0] = 0xab;
        CHECK(w.ledger.view().address_history(nowhere).empty());
        CHECK_THROWS_AS(w.ledger.view().token_history(nowhere, std::nullopt), error);
    }
}

TEST_CASE("replaying the dump reproduces the live state bit-exactly") {
    SimClock clock;
    Ledger ledger(clock, 3);
    Rng rng(1234);
    std::vector<KeyPair> wallets;
    for (int i = 0; i < 4; ++i) {
        wallets.push_back(ledger.create_account(rng));
        ledger.genesis_fund(wallets.back().address, 5'000);
    }
    ledger.seal_block();
    TokenInit init;
    init.nft_holders[1] = wallets[0].address;
    init.fungible_holdings.clear();
    const TokenContract& c = ledger.deploy_token(wallets[0], TokenStandard::NonFungible, init);
    Address contract = c.address;
    ledger.seal_block();
    ledger.transfer_token(wallets[0], contract, 1, 1, wallets[1].address, 0);
    ledger.transfer_native(wallets[2], wallets[3].address, 123);
    ledger.advance_time(60);
    ledger.seal_block();

    auto folded = oracles::fold_dump(ledger.dump_ndjson());
    for (const auto& kp : wallets)
        CHECK(folded.native[kp.address.hex()] ==
              static_cast<long long>(ledger.balance(kp.address)));
    CHECK(folded.native[oracles::kSink] ==
          static_cast<long long>(ledger.balance(Address::gas_sink())));
    CHECK(folded.nft[contract.hex()][1] == wallets[1].address.hex());
}

TEST_CASE("identical seed and call sequence produce identical dumps") {
    auto run = [] {
        SimClock clock;
        Ledger ledger(clock, 2);
        Rng rng(55);
        KeyPair a = ledger.create_account(rng);
        KeyPair b = ledger.create_account(rng);
        ledger.genesis_fund(a.address, 1'000);
        ledger.genesis_fund(b.address, 1'000);
        ledger.seal_block();
        ledger.transfer_native(a, b.address, 17);
        ledger.advance_time(30);
        ledger.seal_block();
        return ledger.dump_ndjson();
    };
    CHECK(run() == run());
}

TEST_CASE("transaction hashes are unique") {
    World w;
    KeyPair a = funded(w, 1000);
    KeyPair b = w.ledger.create_account(w.rng);
    w.ledger.seal_block();
    for (int i = 0; i < 20; ++i) w.ledger.transfer_native(a, b.address, 1);
    w.ledger.seal_block();
    std::set<std::string> hashes;
    for (const auto& blk : w.ledger.blocks())
        for (const auto& tx : blk.txs) CHECK(hashes.insert(tx.hash).second);
}
