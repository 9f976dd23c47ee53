// core/include/cpcv/feature_archive.h

// Copyright 2026  cpcv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CPCV_FEATURE_ARCHIVE_H_
#define CPCV_FEATURE_ARCHIVE_H_

#include <map>
#include <string>
#include <vector>

#include "cpcv/features.h"

namespace cpcv {

// Single-file archive of per-utterance feature records with a trailing offset
// table, plus a plain-text index "<utt-id> <byte-offset>" at <path>.idx.
//
//   record: u32 id_len | id | u32 rows | u32 cols | u8 kind | f32 data
//   table : u32 count | count * (u32 id_len | id | u64 offset)
//   footer: u64 table_offset | magic "CPCA"
class FeatureArchiveWriter {
 public:
  explicit FeatureArchiveWriter(const std::string &path);
  ~FeatureArchiveWriter();

  // Ids must be unique; rows are written in call order.
  void Write(const std::string &utt_id, const FeatureMatrix &f);
  // Writes the offset table, footer, and the text index. Idempotent.
  void Close();

 private:
  struct Entry {
    std::string id;
    uint64_t offset;
  };
  std::string path_;
  std::vector<Entry> entries_;
  void *os_ = nullptr;  // std::ofstream, kept out of the header
};

class FeatureArchiveReader {
 public:
  explicit FeatureArchiveReader(const std::string &path);

  bool Contains(const std::string &utt_id) const;
  FeatureMatrix Read(const std::string &utt_id) const;
  // Ids in file order.
  const std::vector<std::string> &Ids() const { return ids_; }

 private:
  std::string path_;
  std::vector<std::string> ids_;
  std::map<std::string, uint64_t> offsets_;
};

}  // namespace cpcv

#endif  // CPCV_FEATURE_ARCHIVE_H_
