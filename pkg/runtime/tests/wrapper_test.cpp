// Unit checks for the closure wrapper: bare-pointer specialization,
// capture-record forwarding, snapshot-copy semantics, and by-value
// copying of wrappers between frames. Exits nonzero on first failure.
#include "closure.hpp"

#include <cstdio>

static int failures = 0;

#define CHECK_EQ(actual, expected)                                         \
    do {                                                                   \
        int a = (actual), e = (expected);                                  \
        if (a != e) {                                                      \
            std::printf("FAIL %s:%d: got %d, want %d\n", __FILE__,         \
                        __LINE__, a, e);                                   \
            ++failures;                                                    \
        }                                                                  \
    } while (0)

struct scope_one {
    int y;
    scope_one(int init_y) : y(init_y) {}
};

static int add_one(int x) { return x + 1; }

static int add_captured(scope_one& env, int x) { return env.y + x; }

static rt::function<scope_one, int(int)> make_adder(int y) {
    // the record is built from a local; the wrapper must copy it
    scope_one rec(y);
    rt::function<scope_one, int(int)> f(rec, &add_captured);
    rec.y = 999;  // mutation after construction must not be visible
    return f;
}

int main() {
    rt::function<void, int(int)> inc(&add_one);
    CHECK_EQ(inc(41), 42);

    rt::function<scope_one, int(int)> plus7(scope_one(7), &add_captured);
    CHECK_EQ(plus7(5), 12);

    // snapshot: later mutation of the source record is invisible
    rt::function<scope_one, int(int)> plus3 = make_adder(3);
    CHECK_EQ(plus3(10), 13);

    // wrappers copy by value; the copy is independent
    rt::function<scope_one, int(int)> copy = plus7;
    CHECK_EQ(copy(0), 7);
    CHECK_EQ(plus7(0), 7);

    // nested: a wrapper stored inside a capture record
    struct scope_f {
        rt::function<scope_one, int(int)> f;
        scope_f(rt::function<scope_one, int(int)> init_f) : f(init_f) {}
    };
    scope_f holds(plus7);
    CHECK_EQ(holds.f(1), 8);

    if (failures == 0) {
        std::printf("ok\n");
        return 0;
    }
    return 1;
}
