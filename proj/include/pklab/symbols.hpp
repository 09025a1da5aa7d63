#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pklab/error.hpp"

namespace pklab {

enum class VarKind { real_coordinate, real_parameter, complex_parameter };

/// The scalar symbol table for one session. Append-only; expressions hold a
/// shared_ptr to it and create derivative atoms on demand.
///
/// Atoms are the indeterminates of the polynomial layer:
///   - variable atoms (real coordinates x2, parameters t / tbar),
///   - function atoms (an opaque symbol plus a partial-derivative multi-index
///     and a conjugation flag, e.g. fbar_x2_y2).
/// Complex coordinates are not atoms: z2 is sugar for x2 + i*y2, so
/// zero-testing stays a polynomial identity.
class VarContext {
public:
    struct FnInfo {
        std::string name;
        std::vector<uint32_t> args; // variable atom ids (coordinates)
        bool is_real = false;
        bool periodic = false; // declared attribute, never verified
    };

    struct Atom {
        enum class Kind { variable, function } kind;
        std::string name; // canonical printed name
        // variable:
        VarKind vkind = VarKind::real_coordinate;
        uint32_t conj_partner = 0; // ==self for real atoms
        // function:
        uint32_t fn = 0;
        bool conjugated = false;
        std::vector<uint32_t> derivs; // sorted variable atom ids, with repetition
    };

    struct ComplexCoord {
        std::string name; // "z1"
        uint32_t x, y;    // real/imaginary part atoms
    };

    uint32_t add_real_coordinate(const std::string& name) {
        return add_var(name, VarKind::real_coordinate, 0, true);
    }

    /// Declares the pair (x,y) of real coordinates behind a complex coordinate
    /// z = x + i*y; returns the index into complex_coords().
    uint32_t add_complex_coordinate(const std::string& name) {
        std::string base = name;
        std::string xn, yn;
        if (base.size() > 1 && base[0] == 'z') {
            xn = "x" + base.substr(1);
            yn = "y" + base.substr(1);
        } else {
            xn = base + "_x";
            yn = base + "_y";
        }
        ComplexCoord cc{name, add_real_coordinate(xn), add_real_coordinate(yn)};
        complex_coords_.push_back(cc);
        reserve_name(name);
        reserve_name(conj_name(name));
        return static_cast<uint32_t>(complex_coords_.size() - 1);
    }

    uint32_t add_real_parameter(const std::string& name) {
        return add_var(name, VarKind::real_parameter, 0, true);
    }

    /// Declares t and tbar as independent atoms linked by conjugation.
    std::pair<uint32_t, uint32_t> add_complex_parameter(const std::string& name) {
        uint32_t a = add_var(name, VarKind::complex_parameter, 0, false);
        uint32_t b = add_var(conj_name(name), VarKind::complex_parameter, a, false);
        atoms_[a].conj_partner = b;
        return {a, b};
    }

    uint32_t add_function(const std::string& name, std::vector<uint32_t> args, bool is_real,
                          bool periodic = false) {
        for (uint32_t a : args) {
            if (atom(a).kind != Atom::Kind::variable || atom(a).vkind != VarKind::real_coordinate)
                fail(errc::invalid_argument, "function arguments must be coordinates: " + name);
        }
        reserve_name(name);
        if (!is_real) reserve_name(conj_name(name));
        fns_.push_back(FnInfo{name, std::move(args), is_real, periodic});
        uint32_t id = static_cast<uint32_t>(fns_.size() - 1);
        fn_base_atom_[id] = make_fn_atom(id, false, {});
        return id;
    }

    // --- atom construction ---

    uint32_t fn_atom(uint32_t fn, bool conjugated, std::vector<uint32_t> derivs) {
        const FnInfo& f = fns_.at(fn);
        if (f.is_real) conjugated = false;
        std::sort(derivs.begin(), derivs.end()); // mixed partials commute
        return make_fn_atom(fn, conjugated, std::move(derivs));
    }

    /// Derivative of a function atom w.r.t. a variable atom; nullopt means the
    /// derivative is identically zero (variable not among the arguments).
    std::optional<uint32_t> fn_atom_derivative(uint32_t atom_id, uint32_t var_atom) {
        const Atom& a = atom(atom_id);
        const FnInfo& f = fns_.at(a.fn);
        bool found = false;
        for (uint32_t arg : f.args)
            if (arg == var_atom) { found = true; break; }
        if (!found) return std::nullopt;
        std::vector<uint32_t> d = a.derivs;
        d.push_back(var_atom);
        return fn_atom(a.fn, a.conjugated, std::move(d));
    }

    /// conj of an atom; function args are real coordinates so only the flag
    /// (and for variables the partner) changes. conj_partner is the atom
    /// itself for real variables.
    uint32_t conj_atom(uint32_t atom_id) {
        const Atom& a = atom(atom_id);
        if (a.kind == Atom::Kind::variable) return a.conj_partner;
        const FnInfo& f = fns_.at(a.fn);
        if (f.is_real) return atom_id;
        return make_fn_atom(a.fn, !a.conjugated, a.derivs);
    }

    // --- queries ---

    const Atom& atom(uint32_t id) const { return atoms_.at(id); }
    size_t atom_count() const { return atoms_.size(); }
    const std::vector<ComplexCoord>& complex_coords() const { return complex_coords_; }
    const FnInfo& fn(uint32_t id) const { return fns_.at(id); }
    size_t fn_count() const { return fns_.size(); }

    bool is_parameter_atom(uint32_t id) const {
        const Atom& a = atom(id);
        return a.kind == Atom::Kind::variable &&
               (a.vkind == VarKind::real_parameter || a.vkind == VarKind::complex_parameter);
    }
    bool is_coordinate_atom(uint32_t id) const {
        const Atom& a = atom(id);
        return a.kind == Atom::Kind::function ||
               (a.kind == Atom::Kind::variable && a.vkind == VarKind::real_coordinate);
    }

    std::optional<uint32_t> find_variable(const std::string& name) const {
        auto it = var_by_name_.find(name);
        if (it == var_by_name_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<uint32_t> find_fn(const std::string& name) const {
        for (uint32_t i = 0; i < fns_.size(); ++i)
            if (fns_[i].name == name) return i;
        return std::nullopt;
    }
    std::optional<uint32_t> find_complex_coord(const std::string& name) const {
        for (uint32_t i = 0; i < complex_coords_.size(); ++i)
            if (complex_coords_[i].name == name) return i;
        return std::nullopt;
    }

    /// ASCII conjugate spelling: bar goes before trailing digits, so
    /// phi2 -> phibar2, z1 -> zbar1, t -> tbar.
    static std::string conj_name(const std::string& n) {
        size_t end = n.size();
        while (end > 0 && isdigit(static_cast<unsigned char>(n[end - 1]))) --end;
        return n.substr(0, end) + "bar" + n.substr(end);
    }

private:
    uint32_t add_var(const std::string& name, VarKind k, uint32_t partner, bool self_conj) {
        reserve_name(name);
        Atom a;
        a.kind = Atom::Kind::variable;
        a.name = name;
        a.vkind = k;
        atoms_.push_back(a);
        uint32_t id = static_cast<uint32_t>(atoms_.size() - 1);
        atoms_[id].conj_partner = self_conj ? id : partner;
        var_by_name_[name] = id;
        return id;
    }

    uint32_t make_fn_atom(uint32_t fn, bool conjugated, std::vector<uint32_t> derivs) {
        auto key = std::make_tuple(fn, conjugated, derivs);
        auto it = fn_atom_memo_.find(key);
        if (it != fn_atom_memo_.end()) return it->second;
        Atom a;
        a.kind = Atom::Kind::function;
        a.fn = fn;
        a.conjugated = conjugated;
        a.derivs = derivs;
        a.name = conjugated ? conj_name(fns_[fn].name) : fns_[fn].name;
        for (uint32_t d : derivs) a.name += "_" + atoms_[d].name;
        atoms_.push_back(a);
        uint32_t id = static_cast<uint32_t>(atoms_.size() - 1);
        atoms_[id].conj_partner = id;
        fn_atom_memo_[std::move(key)] = id;
        return id;
    }

    void reserve_name(const std::string& name) {
        if (!names_.insert(name).second)
            fail(errc::invalid_argument, "duplicate symbol name: " + name);
    }

    std::vector<Atom> atoms_;
    std::vector<FnInfo> fns_;
    std::vector<ComplexCoord> complex_coords_;
    std::map<std::string, uint32_t> var_by_name_;
    std::map<std::tuple<uint32_t, bool, std::vector<uint32_t>>, uint32_t> fn_atom_memo_;
    std::map<uint32_t, uint32_t> fn_base_atom_;
    std::set<std::string> names_;
};

using CtxPtr = std::shared_ptr<VarContext>;

/// Differentiation target: a real atom, or a Wirtinger direction z / zbar.
struct VarRef {
    enum class Tag { atom, z, zbar } tag = Tag::atom;
    uint32_t id = 0; // atom id, or complex-coordinate index for z/zbar

    static VarRef atom(uint32_t a) { return {Tag::atom, a}; }
    static VarRef z(uint32_t cc) { return {Tag::z, cc}; }
    static VarRef zbar(uint32_t cc) { return {Tag::zbar, cc}; }
};

} // namespace pklab
