#include "changekit/text.hpp"

namespace changekit {

namespace {

// Porter stemmer, following the structure of the reference C implementation
// (including its bli->ble and logi->log rules). `k_` is the index of the last
// character of the current stem, `j_` the end of the stem before a matched
// suffix.
class PorterStemmer {
public:
  explicit PorterStemmer(std::string_view word) : b_(word), k_(static_cast<int>(word.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;
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
    switch (b_[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return false;
    case 'y': return i == 0 ? true : !cons(i - 1);
    default: return true;
    }
  }

  // Number of VC sequences in b[0..j].
  int m() const {
    int n = 0, i = 0;
    for (;;) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    for (;;) {
      for (;;) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      for (;;) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i)
      if (!cons(i)) return true;
    return false;
  }

  bool double_cons(int j) const { return j >= 1 && b_[j] == b_[j - 1] && cons(j); }

  // consonant-vowel-consonant ending at i, where the last c is not w, x or y
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view s) {
    const int len = static_cast<int>(s.size());
    if (len > k_ + 1) return false;
    if (b_.compare(static_cast<std::size_t>(k_ - len + 1), s.size(), s) != 0) return false;
    j_ = k_ - len;
    return true;
  }

  void set_to(std::string_view s) {
    b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
    k_ = j_ + static_cast<int>(s.size());
    b_.resize(static_cast<std::size_t>(k_ + 1));
  }

  void replace_if_measured(std::string_view s) {
    if (m() > 0) set_to(s);
  }

  void step1ab() {
    if (b_[k_] == 's') {
      if (ends("sses")) k_ -= 2;
      else if (ends("ies")) set_to("i");
      else if (b_[k_ - 1] != 's') --k_;
    }
    if (ends("eed")) {
      if (m() > 0) --k_;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      if (ends("at")) set_to("ate");
      else if (ends("bl")) set_to("ble");
      else if (ends("iz")) set_to("ize");
      else if (double_cons(k_)) {
        --k_;
        const char ch = b_[k_];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else if (j_ = k_, m() == 1 && cvc(k_)) {
        set_to("e");
      }
    }
    b_.resize(static_cast<std::size_t>(k_ + 1));
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
  }

  void step2() {
    switch (b_[k_ - 1]) {
    case 'a':
      if (ends("ational")) replace_if_measured("ate");
      else if (ends("tional")) replace_if_measured("tion");
      break;
    case 'c':
      if (ends("enci")) replace_if_measured("ence");
      else if (ends("anci")) replace_if_measured("ance");
      break;
    case 'e':
      if (ends("izer")) replace_if_measured("ize");
      break;
    case 'l':
      if (ends("bli")) replace_if_measured("ble");
      else if (ends("alli")) replace_if_measured("al");
      else if (ends("entli")) replace_if_measured("ent");
      else if (ends("eli")) replace_if_measured("e");
      else if (ends("ousli")) replace_if_measured("ous");
      break;
    case 'o':
      if (ends("ization")) replace_if_measured("ize");
      else if (ends("ation")) replace_if_measured("ate");
      else if (ends("ator")) replace_if_measured("ate");
      break;
    case 's':
      if (ends("alism")) replace_if_measured("al");
      else if (ends("iveness")) replace_if_measured("ive");
      else if (ends("fulness")) replace_if_measured("ful");
      else if (ends("ousness")) replace_if_measured("ous");
      break;
    case 't':
      if (ends("aliti")) replace_if_measured("al");
      else if (ends("iviti")) replace_if_measured("ive");
      else if (ends("biliti")) replace_if_measured("ble");
      break;
    case 'g':
      if (ends("logi")) replace_if_measured("log");
      break;
    default: break;
    }
  }

  void step3() {
    switch (b_[k_]) {
    case 'e':
      if (ends("icate")) replace_if_measured("ic");
      else if (ends("ative")) replace_if_measured("");
      else if (ends("alize")) replace_if_measured("al");
      break;
    case 'i':
      if (ends("iciti")) replace_if_measured("ic");
      break;
    case 'l':
      if (ends("ical")) replace_if_measured("ic");
      else if (ends("ful")) replace_if_measured("");
      break;
    case 's':
      if (ends("ness")) replace_if_measured("");
      break;
    default: break;
    }
  }

  void step4() {
    switch (b_[k_ - 1]) {
    case 'a':
      if (ends("al")) break;
      return;
    case 'c':
      if (ends("ance") || ends("ence")) break;
      return;
    case 'e':
      if (ends("er")) break;
      return;
    case 'i':
      if (ends("ic")) break;
      return;
    case 'l':
      if (ends("able") || ends("ible")) break;
      return;
    case 'n':
      if (ends("ant") || ends("ement") || ends("ment") || ends("ent")) break;
      return;
    case 'o':
      if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) break;
      if (ends("ou")) break;
      return;
    case 's':
      if (ends("ism")) break;
      return;
    case 't':
      if (ends("ate") || ends("iti")) break;
      return;
    case 'u':
      if (ends("ous")) break;
      return;
    case 'v':
      if (ends("ive")) break;
      return;
    case 'z':
      if (ends("ize")) break;
      return;
    default: return;
    }
    if (m() > 1) k_ = j_;
  }

  void step5() {
    j_ = k_;
    if (b_[k_] == 'e') {
      const int a = m();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[k_] == 'l' && double_cons(k_) && m() > 1) --k_;
  }

  std::string b_;
  int k_;
  int j_ = 0;
};

} // namespace

std::string porter_stem(std::string_view word) { return PorterStemmer(word).run(); }

} // namespace changekit
