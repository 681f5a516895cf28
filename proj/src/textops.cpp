#include "vdx/textops.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace vdx::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

template <class Fn>
std::string map_tokens(std::string_view s, Fn&& fn) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (is_space(s[i])) {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        out += fn(s.substr(i, j - i));
        i = j;
    }
    return out;
}

// --- Porter stemmer -------------------------------------------------------

class Porter {
public:
    explicit Porter(std::string w) : b_(std::move(w)) {}

    std::string run() {
        if (b_.size() <= 2) return b_;
        k_ = static_cast<int>(b_.size()) - 1;
        step1ab();
        if (k_ > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        return b_.substr(0, static_cast<std::size_t>(k_ + 1));
    }

private:
    bool cons(int i) const {
        switch (b_[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(i - 1);
            default: return true;
        }
    }
    // Number of VC sequences in b[0..j].
    int m() const {
        int n = 0, i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }
    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i) {
            if (!cons(i)) return true;
        }
        return false;
    }
    bool doublec(int j) const {
        if (j < 1) return false;
        if (b_[static_cast<std::size_t>(j)] != b_[static_cast<std::size_t>(j - 1)]) return false;
        return cons(j);
    }
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        char ch = b_[static_cast<std::size_t>(i)];
        return !(ch == 'w' || ch == 'x' || ch == 'y');
    }
    bool ends(std::string_view s) {
        int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (b_.compare(static_cast<std::size_t>(k_ - len + 1), s.size(), s) != 0) return false;
        j_ = k_ - len;
        return true;
    }
    void setto(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
        k_ = j_ + static_cast<int>(s.size());
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }
    void r(std::string_view s) {
        if (m() > 0) setto(s);
    }

    void step1ab() {
        if (b_[static_cast<std::size_t>(k_)] == 's') {
            if (ends("sses")) {
                k_ -= 2;
            } else if (ends("ies")) {
                setto("i");
            } else if (b_[static_cast<std::size_t>(k_ - 1)] != 's') {
                --k_;
            }
            b_.resize(static_cast<std::size_t>(k_ + 1));
        }
        if (ends("eed")) {
            if (m() > 0) {
                --k_;
                b_.resize(static_cast<std::size_t>(k_ + 1));
            }
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
            if (ends("at")) {
                setto("ate");
            } else if (ends("bl")) {
                setto("ble");
            } else if (ends("iz")) {
                setto("ize");
            } else if (doublec(k_)) {
                char ch = b_[static_cast<std::size_t>(k_)];
                if (!(ch == 'l' || ch == 's' || ch == 'z')) {
                    --k_;
                    b_.resize(static_cast<std::size_t>(k_ + 1));
                }
            } else {
                j_ = k_;
                if (m() == 1 && cvc(k_)) setto_end("e");
            }
        }
    }
    void setto_end(std::string_view s) {
        j_ = k_;
        setto(s);
    }
    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
    }
    void step2() {
        if (k_ < 1) return;
        switch (b_[static_cast<std::size_t>(k_ - 1)]) {
            case 'a':
                if (ends("ational")) { r("ate"); break; }
                if (ends("tional")) { r("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { r("ence"); break; }
                if (ends("anci")) { r("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { r("ize"); break; }
                break;
            case 'l':
                if (ends("bli")) { r("ble"); break; }
                if (ends("alli")) { r("al"); break; }
                if (ends("entli")) { r("ent"); break; }
                if (ends("eli")) { r("e"); break; }
                if (ends("ousli")) { r("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { r("ize"); break; }
                if (ends("ation")) { r("ate"); break; }
                if (ends("ator")) { r("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { r("al"); break; }
                if (ends("iveness")) { r("ive"); break; }
                if (ends("fulness")) { r("ful"); break; }
                if (ends("ousness")) { r("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { r("al"); break; }
                if (ends("iviti")) { r("ive"); break; }
                if (ends("biliti")) { r("ble"); break; }
                break;
            case 'g':
                if (ends("logi")) { r("log"); break; }
                break;
            default: break;
        }
    }
    void step3() {
        switch (b_[static_cast<std::size_t>(k_)]) {
            case 'e':
                if (ends("icate")) { r("ic"); break; }
                if (ends("ative")) { r(""); break; }
                if (ends("alize")) { r("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { r("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { r("ic"); break; }
                if (ends("ful")) { r(""); break; }
                break;
            case 's':
                if (ends("ness")) { r(""); break; }
                break;
            default: break;
        }
    }
    void step4() {
        if (k_ < 1) return;
        bool hit = false;
        switch (b_[static_cast<std::size_t>(k_ - 1)]) {
            case 'a': hit = ends("al"); break;
            case 'c': hit = ends("ance") || ends("ence"); break;
            case 'e': hit = ends("er"); break;
            case 'i': hit = ends("ic"); break;
            case 'l': hit = ends("able") || ends("ible"); break;
            case 'n': hit = ends("ant") || ends("ement") || ends("ment") || ends("ent"); break;
            case 'o':
                if (ends("ion") && j_ >= 0 &&
                    (b_[static_cast<std::size_t>(j_)] == 's' || b_[static_cast<std::size_t>(j_)] == 't')) {
                    hit = true;
                } else {
                    hit = ends("ou");
                }
                break;
            case 's': hit = ends("ism"); break;
            case 't': hit = ends("ate") || ends("iti"); break;
            case 'u': hit = ends("ous"); break;
            case 'v': hit = ends("ive"); break;
            case 'z': hit = ends("ize"); break;
            default: break;
        }
        if (hit && m() > 1) {
            k_ = j_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
        }
    }
    void step5() {
        j_ = k_;
        if (b_[static_cast<std::size_t>(k_)] == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) {
                --k_;
                b_.resize(static_cast<std::size_t>(k_ + 1));
            }
        }
        if (b_[static_cast<std::size_t>(k_)] == 'l' && doublec(k_)) {
            if (m() > 1) {
                --k_;
                b_.resize(static_cast<std::size_t>(k_ + 1));
            }
        }
    }

    std::string b_;
    int k_ = 0;
    int j_ = 0;
};

}  // namespace

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string strip_punct(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (!is_punct(c)) out.push_back(c);
    }
    return out;
}

std::string strip_digits(std::string_view s) {
    return map_tokens(s, [](std::string_view tok) {
        bool digit = std::any_of(tok.begin(), tok.end(), is_digit);
        return digit ? std::string() : std::string(tok);
    });
}

std::string strip_html(std::string_view s) {
    std::string out;
    bool in_tag = false;
    for (char c : s) {
        if (c == '<') {
            in_tag = true;
        } else if (c == '>' && in_tag) {
            in_tag = false;
        } else if (!in_tag) {
            out.push_back(c);
        }
    }
    return out;
}

const std::vector<std::string>& stopwords() {
    static const std::vector<std::string> words = {
        "a",    "an",   "the",  "and",   "or",    "but",  "if",   "of",   "at",   "by",
        "for",  "with", "about", "to",   "from",  "in",   "on",   "is",   "are",  "was",
        "were", "be",   "been", "being", "have",  "has",  "had",  "do",   "does", "did",
        "this", "that", "these", "those", "it",   "its",  "i",    "you",  "he",   "she",
        "we",   "they", "me",   "him",   "her",   "us",   "them", "my",   "your", "not",
    };
    return words;
}

bool is_stopword(std::string_view token) {
    static const std::unordered_set<std::string> set(stopwords().begin(), stopwords().end());
    return set.contains(lower(token));
}

std::string remove_stopwords(std::string_view s) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) {
            auto tok = s.substr(i, j - i);
            if (!is_stopword(tok)) {
                if (!out.empty()) out.push_back(' ');
                out += tok;
            }
        }
        i = j;
    }
    return out;
}

std::string porter_stem(std::string_view word) { return Porter(std::string(word)).run(); }

std::string stem_words(std::string_view s) {
    return map_tokens(s, [](std::string_view tok) {
        if (!std::all_of(tok.begin(), tok.end(), is_alpha)) return std::string(tok);
        return porter_stem(lower(tok));
    });
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && is_space(s[a])) ++a;
    while (b > a && is_space(s[b - 1])) --b;
    return std::string(s.substr(a, b - a));
}

bool apply_op(const StringOp& op, Fields& f) {
    auto map_field = [&](auto&& fn) {
        if (op.col >= f.size()) return false;
        if (f[op.col]) f[op.col] = fn(*f[op.col]);
        return true;
    };
    switch (op.kind) {
        case StrOpKind::Split: {
            if (op.col >= f.size() || op.arg.empty()) return false;
            Field left, right;
            if (f[op.col]) {
                const auto& v = *f[op.col];
                auto pos = v.find(op.arg);
                if (pos == std::string::npos) {
                    left = v;
                    right = std::string();
                } else {
                    left = v.substr(0, pos);
                    right = v.substr(pos + op.arg.size());
                }
            }
            f[op.col] = std::move(left);
            f.insert(f.begin() + static_cast<std::ptrdiff_t>(op.col) + 1, std::move(right));
            return true;
        }
        case StrOpKind::Merge: {
            if (op.col >= f.size() || op.col2 >= f.size() || op.col == op.col2) return false;
            std::size_t lo = std::min(op.col, op.col2), hi = std::max(op.col, op.col2);
            Field merged;
            if (f[op.col] && f[op.col2]) merged = *f[op.col] + op.arg + *f[op.col2];
            f[lo] = std::move(merged);
            f.erase(f.begin() + static_cast<std::ptrdiff_t>(hi));
            return true;
        }
        case StrOpKind::Drop:
            if (op.col >= f.size() || f.size() < 2) return false;
            f.erase(f.begin() + static_cast<std::ptrdiff_t>(op.col));
            return true;
        case StrOpKind::Substring:
            if (op.i > op.j) return false;
            return map_field([&](const std::string& v) {
                if (op.i >= v.size()) return std::string();
                return v.substr(op.i, std::min(op.j, v.size()) - op.i);
            });
        case StrOpKind::Lower: return map_field([](const std::string& v) { return lower(v); });
        case StrOpKind::Upper: return map_field([](const std::string& v) { return upper(v); });
        case StrOpKind::StripPunct: return map_field([](const std::string& v) { return strip_punct(v); });
        case StrOpKind::StripDigits: return map_field([](const std::string& v) { return strip_digits(v); });
        case StrOpKind::StripHtml: return map_field([](const std::string& v) { return strip_html(v); });
        case StrOpKind::RemoveStopwords:
            return map_field([](const std::string& v) { return remove_stopwords(v); });
        case StrOpKind::Stem: return map_field([](const std::string& v) { return stem_words(v); });
        case StrOpKind::Trim: return map_field([](const std::string& v) { return trim(v); });
    }
    return false;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::size_t count_pattern(std::string_view s, std::string_view pattern) {
    if (pattern.empty()) return 0;
    std::size_t n = 0, pos = 0;
    while ((pos = s.find(pattern, pos)) != std::string_view::npos) {
        ++n;
        pos += pattern.size();
    }
    return n;
}

std::size_t count_feature_pattern(std::string_view s, std::string_view pattern) {
    if (pattern == kDigitPattern) return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), is_digit));
    if (pattern.starts_with("w:")) {
        auto word = pattern.substr(2);
        std::size_t n = 0, i = 0;
        while (i < s.size()) {
            while (i < s.size() && !std::isalnum(static_cast<unsigned char>(s[i]))) ++i;
            std::size_t j = i;
            while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
            if (j > i && lower(s.substr(i, j - i)) == word) ++n;
            i = j;
        }
        return n;
    }
    return count_pattern(s, pattern);
}

const std::vector<std::string>& pattern_library() {
    static const std::vector<std::string> lib = [] {
        std::vector<std::string> out = {" ", ",", "?", "%", "(", ")", std::string(kDigitPattern)};
        for (char c = 33; c < 127; ++c) {
            if (!is_punct(c)) continue;
            std::string p(1, c);
            if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
        }
        for (const auto& w : stopwords()) out.push_back("w:" + w);
        return out;
    }();
    return lib;
}

}  // namespace vdx::text
