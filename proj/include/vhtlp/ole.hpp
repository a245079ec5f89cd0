#pragma once
// Oblivious linear function evaluation: the ideal functionality F_OLE and
// the enhanced two-round protocol built from two F_OLE calls. F_OLE is a
// trusted in-process broker; the protocol layer above it is what the rest
// of the library relies on.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vhtlp/field.hpp"

namespace vhtlp {

struct ReceiverInputZeroError : Error {
    ReceiverInputZeroError() : Error("enhanced OLE requires a nonzero receiver input") {}
};

struct ProtocolAbortError : Error {
    explicit ProtocolAbortError(const std::string& what) : Error("protocol abort: " + what) {}
};

struct OleSenderInput {
    FieldElement a;
    FieldElement b;
};

struct OleReceiverInput {
    FieldElement c;
};

// Ideal functionality: the receiver learns a*c + b, the sender learns nothing.
inline FieldElement f_ole(const OleSenderInput& sender, const OleReceiverInput& receiver) {
    return sender.a * receiver.c + sender.b;
}

struct OleTranscriptEntry {
    std::uint64_t session;
    std::string direction;  // e.g. "receiver->fole1"
    std::vector<mpz_class> values;
};

using OleTranscript = std::vector<OleTranscriptEntry>;

// Tamper hook for the ideal functionality's inputs. Returning nullopt marks
// the value malformed, which makes the functionality abort. Honest runs
// never install a hook.
using OleInputHook =
    std::function<std::optional<FieldElement>(const std::string& stage, const FieldElement& value)>;

struct OleResult {
    FieldElement output;        // a*c + b, delivered to the receiver
    FieldElement sender_view;   // t = c^{-1}*u + r, the only message the sender sees
    FieldElement receiver_mid;  // k = a*c + b + r*c before the receiver's correction
};

namespace detail {

inline FieldElement hooked(const OleInputHook& hook, const std::string& stage, const FieldElement& v) {
    if (!hook) return v;
    auto out = hook(stage, v);
    if (!out) throw ProtocolAbortError("malformed input at " + stage);
    return *out;
}

}  // namespace detail

// Enhanced OLE with explicit receiver randomness; the deterministic core
// used by tests that enumerate r and u.
inline OleResult ole_plus_with_randomness(const OleSenderInput& sender, const OleReceiverInput& receiver,
                                          const FieldElement& r, const FieldElement& u,
                                          std::uint64_t session = 0, OleTranscript* transcript = nullptr,
                                          const OleInputHook& hook = {}) {
    if (receiver.c.is_zero()) throw ReceiverInputZeroError();
    FieldElement c_inv = inv(receiver.c);

    // first F_OLE: receiver plays sender with (c^{-1}, r); sender inputs u
    FieldElement in_cinv = detail::hooked(hook, "fole1.a", c_inv);
    FieldElement in_r = detail::hooked(hook, "fole1.b", r);
    FieldElement in_u = detail::hooked(hook, "fole1.c", u);
    FieldElement t = f_ole({in_cinv, in_r}, {in_u});
    if (transcript) {
        transcript->push_back({session, "receiver->fole1", {c_inv.value(), r.value()}});
        transcript->push_back({session, "sender->fole1", {u.value()}});
        transcript->push_back({session, "fole1->sender", {t.value()}});
    }

    // second F_OLE: sender supplies (t + a, b - u); receiver inputs c
    FieldElement in_ta = detail::hooked(hook, "fole2.a", t + sender.a);
    FieldElement in_bu = detail::hooked(hook, "fole2.b", sender.b - u);
    FieldElement in_c = detail::hooked(hook, "fole2.c", receiver.c);
    FieldElement k = f_ole({in_ta, in_bu}, {in_c});
    if (transcript) {
        transcript->push_back({session, "sender->fole2", {in_ta.value(), in_bu.value()}});
        transcript->push_back({session, "receiver->fole2", {receiver.c.value()}});
        transcript->push_back({session, "fole2->receiver", {k.value()}});
    }

    return OleResult{k - r * receiver.c, t, k};
}

inline OleResult ole_plus(const OleSenderInput& sender, const OleReceiverInput& receiver, SeededRng& rng,
                          std::uint64_t session = 0, OleTranscript* transcript = nullptr,
                          const OleInputHook& hook = {}) {
    const FieldPtr& field = receiver.c.field();
    FieldElement r = random_element(rng, field);
    FieldElement u = random_element(rng, field);
    return ole_plus_with_randomness(sender, receiver, r, u, session, transcript, hook);
}

}  // namespace vhtlp
