#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lift {

// Pointer value: a region id, NULL, or the undefined value (reading it faults).
struct Val {
  enum Kind { Null, Top, Reg } kind = Top;
  int reg = -1;

  static Val null() { return {Null, -1}; }
  static Val top() { return {Top, -1}; }
  static Val region(int r) { return {Reg, r}; }

  bool is_null() const { return kind == Null; }
  bool is_top() const { return kind == Top; }
  bool is_reg() const { return kind == Reg; }

  friend bool operator==(const Val &a, const Val &b) {
    return a.kind == b.kind && (a.kind != Reg || a.reg == b.reg);
  }
  friend bool operator!=(const Val &a, const Val &b) { return !(a == b); }
  friend bool operator<(const Val &a, const Val &b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.kind == Reg && a.reg < b.reg;
  }
};

// Data value: an integer or undefined.
struct DataVal {
  bool top = true;
  long long num = 0;

  static DataVal tv() { return {true, 0}; }
  static DataVal of(long long n) { return {false, n}; }

  friend bool operator==(const DataVal &a, const DataVal &b) {
    return a.top == b.top && (a.top || a.num == b.num);
  }
  friend bool operator!=(const DataVal &a, const DataVal &b) { return !(a == b); }
  friend bool operator<(const DataVal &a, const DataVal &b) {
    if (a.top != b.top) return a.top < b.top;
    return !a.top && a.num < b.num;
  }
};

// An SMG object: a region or a doubly-linked list segment (pair of end regions).
struct ObjId {
  int front = -1;
  int back = -1;
  bool dls = false;

  static ObjId region(int r) { return {r, r, false}; }
  static ObjId segment(int f, int b) { return {f, b, true}; }

  friend bool operator==(const ObjId &a, const ObjId &b) {
    return a.dls == b.dls && a.front == b.front && a.back == b.back;
  }
  friend bool operator!=(const ObjId &a, const ObjId &b) { return !(a == b); }
  friend bool operator<(const ObjId &a, const ObjId &b) {
    if (a.dls != b.dls) return a.dls < b.dls;
    if (a.front != b.front) return a.front < b.front;
    return a.back < b.back;
  }
  std::string str() const {
    if (!dls) return "r" + std::to_string(front);
    return "d" + std::to_string(front) + "~" + std::to_string(back);
  }
};

inline const std::string kSelNext = "next";
inline const std::string kSelPrev = "prev";

struct LiftError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace lift
