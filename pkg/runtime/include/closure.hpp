// Stack-allocated closure support: a callable wrapper pairing a capture
// record with a function pointer that receives the record first. Lambdas
// that capture nothing specialize to a bare function pointer. Construction
// copies the capture record (snapshot), never aliasing caller locals.
// Self-contained and allocation-free by design.
#ifndef SFC_RUNTIME_CLOSURE_HPP
#define SFC_RUNTIME_CLOSURE_HPP

namespace rt {

template <typename ClosureType, typename Signature>
class function;

template <typename Result, typename... Args>
class function<void, Result(Args...)> {
private:
    Result (*F)(Args...);

public:
    function(Result (*f)(Args...)) : F(f) {}

    Result operator()(Args... args) {
        return F(args...);
    }
};

template <typename ClosureType, typename Result, typename... Args>
class function<ClosureType, Result(Args...)> {
private:
    ClosureType Closure;
    Result (*F)(ClosureType&, Args...);

public:
    function(ClosureType closure, Result (*f)(ClosureType&, Args...))
        : Closure(closure), F(f) {}

    Result operator()(Args... args) {
        return F(Closure, args...);
    }
};

}  // namespace rt

#endif  // SFC_RUNTIME_CLOSURE_HPP
