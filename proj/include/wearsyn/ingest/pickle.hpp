#pragma once

// Minimal pickle virtual machine covering the opcode subset that WESAD-style
// archives use: nested dicts with string keys, numpy ndarrays, scalars. Both
// python2-era string opcodes (decoded as latin-1, matching
// pickle.load(..., encoding="latin1")) and protocol 3+ unicode/bytes are
// handled.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "wearsyn/core/errors.hpp"

namespace wearsyn::pickle {

struct Value;
using ValuePtr = std::shared_ptr<Value>;

struct NdArray {
    std::vector<std::size_t> shape;
    std::string dtype;  // numpy kind+size, e.g. "f8", "i4", "u2", "b1"
    bool fortran_order = false;
    std::vector<double> data;  // row-major after load

    std::size_t count() const {
        std::size_t n = 1;
        for (auto s : shape) n *= s;
        return n;
    }
};

// Internal markers used while executing the stream.
struct Global {
    std::string module, name;
};
struct Dtype {
    std::string descr;
};
struct ArrayPlaceholder {};  // result of _reconstruct before BUILD fills it

struct Value {
    std::variant<std::monostate, bool, std::int64_t, double, std::string, NdArray,
                 std::vector<ValuePtr>, std::map<std::string, ValuePtr>, Global, Dtype,
                 ArrayPlaceholder>
        v;

    bool is_none() const { return std::holds_alternative<std::monostate>(v); }
    bool is_dict() const { return std::holds_alternative<std::map<std::string, ValuePtr>>(v); }
    bool is_array() const { return std::holds_alternative<NdArray>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }

    const std::map<std::string, ValuePtr>& dict() const {
        if (!is_dict()) throw ParseError("pickle: expected dict");
        return std::get<std::map<std::string, ValuePtr>>(v);
    }
    const NdArray& array() const {
        if (!is_array()) throw ParseError("pickle: expected ndarray");
        return std::get<NdArray>(v);
    }
    const ValuePtr& at(const std::string& key) const {
        const auto& d = dict();
        auto it = d.find(key);
        if (it == d.end()) throw ParseError("pickle: missing key '" + key + "'");
        return it->second;
    }
    bool has(const std::string& key) const {
        return is_dict() && dict().count(key) > 0;
    }
};

namespace detail {

class Reader {
public:
    explicit Reader(const std::string& bytes) : data_(bytes) {}

    ValuePtr run() {
        while (true) {
            unsigned char op = u8();
            switch (op) {
                case 0x80: u8(); break;                       // PROTO
                case 0x95: skip(8); break;                    // FRAME
                case '.': return pop();                       // STOP
                case 'N': push(mk(std::monostate{})); break;  // NONE
                case 0x88: push(mk(true)); break;             // NEWTRUE
                case 0x89: push(mk(false)); break;            // NEWFALSE
                case 'J': push(mk(static_cast<std::int64_t>(i32()))); break;  // BININT
                case 'K': push(mk(static_cast<std::int64_t>(u8()))); break;   // BININT1
                case 'M': push(mk(static_cast<std::int64_t>(u16()))); break;  // BININT2
                case 0x8a: {  // LONG1
                    std::size_t n = u8();
                    push(mk(read_long(n)));
                    break;
                }
                case 'G': {  // BINFLOAT, big-endian double
                    double d;
                    unsigned char b[8];
                    for (int i = 7; i >= 0; --i) b[i] = u8();
                    std::memcpy(&d, b, 8);
                    push(mk(d));
                    break;
                }
                case 'U': push(mk(str(u8()))); break;         // SHORT_BINSTRING (latin1)
                case 'T': push(mk(str(u32()))); break;        // BINSTRING
                case 0x8c: push(mk(str(u8()))); break;        // SHORT_BINUNICODE
                case 'X': push(mk(str(u32()))); break;        // BINUNICODE
                case 'C': push(mk(str(u8()))); break;         // SHORT_BINBYTES
                case 'B': push(mk(str(u32()))); break;        // BINBYTES
                case 0x8e: push(mk(str(u64()))); break;       // BINBYTES8
                case '}': push(mk(std::map<std::string, ValuePtr>{})); break;  // EMPTY_DICT
                case ']': push(mk(std::vector<ValuePtr>{})); break;            // EMPTY_LIST
                case ')': push(mk(std::vector<ValuePtr>{})); break;            // EMPTY_TUPLE
                case '(': marks_.push_back(stack_.size()); break;              // MARK
                case 't': {  // TUPLE
                    auto items = pop_to_mark();
                    push(mk(std::move(items)));
                    break;
                }
                case 0x85: {  // TUPLE1
                    auto a = pop();
                    push(mk(std::vector<ValuePtr>{a}));
                    break;
                }
                case 0x86: {  // TUPLE2
                    auto b = pop(), a = pop();
                    push(mk(std::vector<ValuePtr>{a, b}));
                    break;
                }
                case 0x87: {  // TUPLE3
                    auto c = pop(), b = pop(), a = pop();
                    push(mk(std::vector<ValuePtr>{a, b, c}));
                    break;
                }
                case 'l': {  // LIST
                    auto items = pop_to_mark();
                    push(mk(std::move(items)));
                    break;
                }
                case 'a': {  // APPEND
                    auto item = pop();
                    as_list(top()).push_back(item);
                    break;
                }
                case 'e': {  // APPENDS
                    auto items = pop_to_mark();
                    auto& lst = as_list(top());
                    lst.insert(lst.end(), items.begin(), items.end());
                    break;
                }
                case 's': {  // SETITEM
                    auto val = pop();
                    auto key = pop();
                    set_item(top(), key, val);
                    break;
                }
                case 'u': {  // SETITEMS
                    auto items = pop_to_mark();
                    for (std::size_t i = 0; i + 1 < items.size(); i += 2)
                        set_item(top(), items[i], items[i + 1]);
                    break;
                }
                case 'd': {  // DICT
                    auto items = pop_to_mark();
                    auto d = mk(std::map<std::string, ValuePtr>{});
                    for (std::size_t i = 0; i + 1 < items.size(); i += 2)
                        set_item(d, items[i], items[i + 1]);
                    push(d);
                    break;
                }
                case 'q': memo_put(u8()); break;      // BINPUT
                case 'r': memo_put(u32()); break;     // LONG_BINPUT
                case 0x94: memo_put(memo_.size()); break;  // MEMOIZE
                case 'h': push(memo_get(u8())); break;     // BINGET
                case 'j': push(memo_get(u32())); break;    // LONG_BINGET
                case 'c': {  // GLOBAL
                    std::string module = line(), name = line();
                    push(mk(Global{module, name}));
                    break;
                }
                case 0x93: {  // STACK_GLOBAL
                    auto name = pop(), module = pop();
                    push(mk(Global{std::get<std::string>(module->v),
                                   std::get<std::string>(name->v)}));
                    break;
                }
                case 'R': {  // REDUCE
                    auto args = pop();
                    auto callable = pop();
                    push(reduce(callable, args));
                    break;
                }
                case 0x81: {  // NEWOBJ
                    auto args = pop();
                    auto cls = pop();
                    push(reduce(cls, args));
                    break;
                }
                case 'b': {  // BUILD
                    auto state = pop();
                    auto obj = pop();
                    push(build(obj, state));
                    break;
                }
                case '0': pop(); break;  // POP
                case '2': push(top()); break;  // DUP
                default:
                    throw ParseError("pickle: unsupported opcode 0x" + hex(op));
            }
        }
    }

private:
    const std::string& data_;
    std::size_t pos_ = 0;
    std::vector<ValuePtr> stack_;
    std::vector<std::size_t> marks_;
    std::map<std::size_t, ValuePtr> memo_;

    static std::string hex(unsigned char c) {
        static const char* d = "0123456789abcdef";
        return {d[c >> 4], d[c & 15]};
    }

    template <class T>
    static ValuePtr mk(T&& t) {
        auto p = std::make_shared<Value>();
        p->v = std::forward<T>(t);
        return p;
    }

    unsigned char u8() {
        if (pos_ >= data_.size()) throw ParseError("pickle: truncated stream");
        return static_cast<unsigned char>(data_[pos_++]);
    }
    void skip(std::size_t n) { pos_ += n; }
    std::uint16_t u16() {
        std::uint16_t a = u8(), b = u8();
        return static_cast<std::uint16_t>(a | (b << 8));
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t read_long(std::size_t n) {  // little-endian two's complement
        std::int64_t v = 0;
        unsigned char last = 0;
        for (std::size_t i = 0; i < n; ++i) {
            last = u8();
            v |= static_cast<std::int64_t>(last) << (8 * i);
        }
        if (n > 0 && n < 8 && (last & 0x80)) v -= static_cast<std::int64_t>(1) << (8 * n);
        return v;
    }
    std::string str(std::size_t n) {
        if (pos_ + n > data_.size()) throw ParseError("pickle: truncated string");
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string line() {
        std::string s;
        while (true) {
            char c = static_cast<char>(u8());
            if (c == '\n') break;
            s.push_back(c);
        }
        return s;
    }

    void push(ValuePtr v) { stack_.push_back(std::move(v)); }
    ValuePtr pop() {
        if (stack_.empty()) throw ParseError("pickle: stack underflow");
        auto v = stack_.back();
        stack_.pop_back();
        return v;
    }
    ValuePtr& top() {
        if (stack_.empty()) throw ParseError("pickle: stack underflow");
        return stack_.back();
    }
    std::vector<ValuePtr> pop_to_mark() {
        if (marks_.empty()) throw ParseError("pickle: no mark");
        std::size_t m = marks_.back();
        marks_.pop_back();
        std::vector<ValuePtr> items(stack_.begin() + m, stack_.end());
        stack_.resize(m);
        return items;
    }
    static std::vector<ValuePtr>& as_list(ValuePtr& v) {
        if (!std::holds_alternative<std::vector<ValuePtr>>(v->v))
            throw ParseError("pickle: expected list on stack");
        return std::get<std::vector<ValuePtr>>(v->v);
    }
    static void set_item(ValuePtr& d, const ValuePtr& key, const ValuePtr& val) {
        if (!d->is_dict()) throw ParseError("pickle: SETITEM on non-dict");
        if (!key->is_string()) throw ParseError("pickle: only string dict keys supported");
        std::get<std::map<std::string, ValuePtr>>(d->v)[std::get<std::string>(key->v)] = val;
    }
    void memo_put(std::size_t idx) {
        if (stack_.empty()) throw ParseError("pickle: memo put on empty stack");
        memo_[idx] = stack_.back();
    }
    ValuePtr memo_get(std::size_t idx) {
        auto it = memo_.find(idx);
        if (it == memo_.end()) throw ParseError("pickle: memo miss");
        return it->second;
    }

    static bool is_global(const ValuePtr& v, const char* name) {
        return std::holds_alternative<Global>(v->v) && std::get<Global>(v->v).name == name;
    }

    ValuePtr reduce(const ValuePtr& callable, const ValuePtr& args) {
        if (is_global(callable, "_reconstruct")) return mk(ArrayPlaceholder{});
        if (is_global(callable, "dtype")) {
            const auto& a = std::get<std::vector<ValuePtr>>(args->v);
            if (a.empty() || !a[0]->is_string()) throw ParseError("pickle: bad dtype args");
            return mk(Dtype{std::get<std::string>(a[0]->v)});
        }
        if (is_global(callable, "ndarray")) return mk(ArrayPlaceholder{});
        if (is_global(callable, "scalar")) {
            // numpy scalar: (dtype, bytes) -> plain double
            const auto& a = std::get<std::vector<ValuePtr>>(args->v);
            if (a.size() == 2 && std::holds_alternative<Dtype>(a[0]->v) && a[1]->is_string()) {
                NdArray tmp;
                tmp.dtype = std::get<Dtype>(a[0]->v).descr;
                tmp.shape = {1};
                decode_buffer(tmp, std::get<std::string>(a[1]->v));
                return mk(tmp.data.empty() ? 0.0 : tmp.data[0]);
            }
            throw ParseError("pickle: unsupported numpy scalar");
        }
        if (is_global(callable, "encode") || is_global(callable, "_unpickle") ||
            is_global(callable, "OrderedDict"))
            return mk(std::map<std::string, ValuePtr>{});
        if (std::holds_alternative<Global>(callable->v)) {
            const auto& g = std::get<Global>(callable->v);
            throw ParseError("pickle: cannot reconstruct " + g.module + "." + g.name);
        }
        throw ParseError("pickle: REDUCE with non-callable");
    }

    ValuePtr build(const ValuePtr& obj, const ValuePtr& state) {
        if (std::holds_alternative<ArrayPlaceholder>(obj->v)) {
            // ndarray.__setstate__: (version, shape, dtype, fortran_order, data)
            const auto& st = std::get<std::vector<ValuePtr>>(state->v);
            if (st.size() != 5) throw ParseError("pickle: bad ndarray state");
            NdArray arr;
            for (const auto& dim : std::get<std::vector<ValuePtr>>(st[1]->v))
                arr.shape.push_back(static_cast<std::size_t>(std::get<std::int64_t>(dim->v)));
            if (!std::holds_alternative<Dtype>(st[2]->v))
                throw ParseError("pickle: ndarray state without dtype");
            arr.dtype = std::get<Dtype>(st[2]->v).descr;
            arr.fortran_order = std::holds_alternative<bool>(st[3]->v) && std::get<bool>(st[3]->v);
            if (!st[4]->is_string()) throw ParseError("pickle: ndarray data must be bytes");
            decode_buffer(arr, std::get<std::string>(st[4]->v));
            if (arr.fortran_order) to_row_major(arr);
            auto p = std::make_shared<Value>();
            p->v = std::move(arr);
            return p;
        }
        if (std::holds_alternative<Dtype>(obj->v)) return obj;  // endianness state ignored; see decode_buffer
        if (obj->is_dict() && state->is_dict()) {
            auto merged = obj;
            for (const auto& [k, val] : state->dict())
                std::get<std::map<std::string, ValuePtr>>(merged->v)[k] = val;
            return merged;
        }
        return obj;
    }

    static void decode_buffer(NdArray& arr, const std::string& buf) {
        // dtype descr may carry a byte-order prefix; only little-endian and
        // native (assumed little) are supported.
        std::string d = arr.dtype;
        if (!d.empty() && (d[0] == '<' || d[0] == '=' || d[0] == '|')) d = d.substr(1);
        if (!d.empty() && d[0] == '>')
            throw ParseError("pickle: big-endian arrays unsupported");
        std::size_t n = arr.count();
        arr.data.resize(n);
        auto need = [&](std::size_t bytes) {
            if (buf.size() < n * bytes) throw ParseError("pickle: ndarray buffer too small");
        };
        const char* p = buf.data();
        if (d == "f8") {
            need(8);
            for (std::size_t i = 0; i < n; ++i) {
                double v;
                std::memcpy(&v, p + 8 * i, 8);
                arr.data[i] = v;
            }
        } else if (d == "f4") {
            need(4);
            for (std::size_t i = 0; i < n; ++i) {
                float v;
                std::memcpy(&v, p + 4 * i, 4);
                arr.data[i] = v;
            }
        } else if (d == "i8") {
            need(8);
            for (std::size_t i = 0; i < n; ++i) {
                std::int64_t v;
                std::memcpy(&v, p + 8 * i, 8);
                arr.data[i] = static_cast<double>(v);
            }
        } else if (d == "i4") {
            need(4);
            for (std::size_t i = 0; i < n; ++i) {
                std::int32_t v;
                std::memcpy(&v, p + 4 * i, 4);
                arr.data[i] = v;
            }
        } else if (d == "i2") {
            need(2);
            for (std::size_t i = 0; i < n; ++i) {
                std::int16_t v;
                std::memcpy(&v, p + 2 * i, 2);
                arr.data[i] = v;
            }
        } else if (d == "i1") {
            need(1);
            for (std::size_t i = 0; i < n; ++i)
                arr.data[i] = static_cast<signed char>(buf[i]);
        } else if (d == "u8") {
            need(8);
            for (std::size_t i = 0; i < n; ++i) {
                std::uint64_t v;
                std::memcpy(&v, p + 8 * i, 8);
                arr.data[i] = static_cast<double>(v);
            }
        } else if (d == "u4") {
            need(4);
            for (std::size_t i = 0; i < n; ++i) {
                std::uint32_t v;
                std::memcpy(&v, p + 4 * i, 4);
                arr.data[i] = v;
            }
        } else if (d == "u2") {
            need(2);
            for (std::size_t i = 0; i < n; ++i) {
                std::uint16_t v;
                std::memcpy(&v, p + 2 * i, 2);
                arr.data[i] = v;
            }
        } else if (d == "u1" || d == "b1") {
            need(1);
            for (std::size_t i = 0; i < n; ++i)
                arr.data[i] = static_cast<unsigned char>(buf[i]);
        } else {
            throw ParseError("pickle: unsupported dtype '" + arr.dtype + "'");
        }
    }

    static void to_row_major(NdArray& arr) {
        if (arr.shape.size() < 2) {
            arr.fortran_order = false;
            return;
        }
        if (arr.shape.size() != 2)
            throw ParseError("pickle: fortran order only handled for 2-D arrays");
        std::size_t rows = arr.shape[0], cols = arr.shape[1];
        std::vector<double> out(arr.data.size());
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = arr.data[c * rows + r];
        arr.data = std::move(out);
        arr.fortran_order = false;
    }
};

}  // namespace detail

inline ValuePtr loads(const std::string& bytes) { return detail::Reader(bytes).run(); }

inline ValuePtr load_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return loads(bytes);
}

}  // namespace wearsyn::pickle
