// Copyright 2026 The MTBR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtbr/synth.h"

#include <random>
#include <string>
#include <string_view>

#include "mtbr/bootstrap.h"
#include "mtbr/error.h"
#include "mtbr/tagset.h"

namespace mtbr {

namespace {

using Words = std::vector<std::string_view>;

const Words kGiven = {"Ahmad",  "Siti",   "Muhammad", "Nurul",  "Aziz",
                      "Farah",  "Hafiz",  "Aisyah",   "Zainal", "Rosmah",
                      "Ismail", "Kamal",  "Liyana",   "Rahim",  "Salmah",
                      "Yusof",  "Hamidah", "Faizal",  "Daud",   "Mariam"};
const Words kFamily = {"Abdullah", "Hassan", "Ibrahim", "Othman", "Ismail",
                       "Razak",    "Rahman", "Yusof",   "Salleh", "Ahmad"};
const Words kTitles = {"Encik", "Puan", "Datuk", "Prof", "Tan Sri", "Cik"};

const Words kPlaces = {"Kuala Lumpur", "Johor Bahru",   "Pulau Pinang",
                       "Melaka",       "Ipoh",          "Kota Kinabalu",
                       "Kuching",      "Shah Alam",     "Putrajaya",
                       "Seremban",     "Sungai Petani", "Alor Setar",
                       "Kuala Terengganu", "Selangor",  "Sabah",
                       "Sarawak",      "Malaysia",      "Singapura",
                       "Brunei",       "Jakarta"};
const Words kOrgs = {"Universiti Malaya",
                     "Bank Negara Malaysia",
                     "Petronas",
                     "Maybank",
                     "Universiti Kebangsaan Malaysia",
                     "Kementerian Kesihatan",
                     "Polis Diraja Malaysia",
                     "Tenaga Nasional Berhad",
                     "Dewan Rakyat",
                     "Suruhanjaya Pilihan Raya",
                     "Majlis Bandaraya Johor Bahru",
                     "Persatuan Bola Sepak Malaysia",
                     "Axiata",
                     "Sime Darby",
                     "Universiti Sains Malaysia",
                     "Lembaga Hasil Dalam Negeri"};

// Novel names are built from these so test sentences contain unseen tokens.
const Words kSyllables = {"ra", "ma", "si", "di", "ka", "lu", "na", "ti",
                          "ba", "jo", "wa", "ri", "sa", "hi", "mu", "de",
                          "pa", "go", "ni", "ya"};
const Words kPlacePrefix = {"Kampung", "Bukit", "Taman", "Bandar"};
const Words kOrgPattern = {"Syarikat", "Koperasi", "Yayasan"};

const Words kDays = {"Isnin", "Selasa", "Rabu", "Khamis", "Jumaat", "Sabtu",
                     "Ahad"};
const Words kVisit = {"melawat", "mengunjungi", "tiba di", "berada di"};
const Words kSay = {"berkata", "menjelaskan", "memaklumkan", "menegaskan"};
const Words kAnnounce = {"mengumumkan", "melancarkan", "memperkenalkan"};
const Words kThings = {"projek baharu", "pelan tindakan", "dasar ekonomi",
                       "program latihan", "skim bantuan"};

// Slots: P = person, L = location, G = organisation, T = title,
// D = day, N = number, Y = year, V/S/A/H = verb and noun lists.
const std::vector<std::string_view> kTemplates = {
    "T P V L semalam .",
    "G A H di L .",
    "Menurut P , G akan membuka cawangan di L .",
    "P dan P bertemu di L pada hari D .",
    "Pegawai G P S projek itu siap .",
    "Kerajaan L bekerjasama dengan G .",
    "P dilahirkan di L pada tahun Y .",
    "Harga minyak naik sebanyak N peratus minggu lalu .",
    "Wakil G , P , hadir ke majlis itu .",
    "Pasukan dari L menewaskan G N - N .",
    "Cuaca di L dijangka cerah esok .",
    "P menyertai G sejak Y .",
    "Pelajar G dari L memenangi pertandingan itu .",
    "T P S bahawa G perlu bertindak segera .",
    "Mesyuarat antara G dan G diadakan di L .",
    "Ramai penduduk L menyokong cadangan P .",
    "Jualan rumah meningkat pada suku ketiga .",
    "P S kepada pemberita di L pada hari D .",
    "Laporan G menunjukkan pertumbuhan N peratus .",
    "T P dan T P V L minggu depan .",
};

class Builder {
 public:
  Builder(std::uint64_t seed, double novel_rate)
      : rng_(seed), novel_rate_(novel_rate) {}

  size_t Pick(size_t n) { return static_cast<size_t>(rng_() % n); }
  std::string_view Choose(const Words &w) { return w[Pick(w.size())]; }

  void Emit(std::string_view text, int label_type) {
    bool first = true;
    for (auto &tok : Tokenize(text)) {
      s_.tokens.push_back(tok);
      if (label_type == kSpanO) {
        s_.ner_tags.push_back(kO);
      } else {
        s_.ner_tags.push_back(first ? BeginLabel(label_type)
                                    : InsideLabel(label_type));
      }
      first = false;
    }
  }

  bool Novel() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < novel_rate_;
  }

  std::string Coined() {
    std::string w;
    const size_t n = 2 + Pick(2);
    for (size_t i = 0; i < n; ++i) w += Choose(kSyllables);
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  }

  std::string Given() { return Novel() ? Coined() : std::string(Choose(kGiven)); }
  std::string Family() { return Novel() ? Coined() : std::string(Choose(kFamily)); }

  std::string Person() {
    std::string name = Given();
    const size_t shape = Pick(4);
    if (shape >= 1) name += " " + Family();
    if (shape == 3) name += " bin " + Given();
    return name;
  }

  std::string Place() {
    if (!Novel()) return std::string(Choose(kPlaces));
    return std::string(Choose(kPlacePrefix)) + " " + Coined();
  }

  std::string Org() {
    if (!Novel()) return std::string(Choose(kOrgs));
    std::string name = std::string(Choose(kOrgPattern)) + " " + Coined();
    if (Pick(2)) name += " Berhad";
    return name;
  }

  LabeledSentence Sentence(std::string_view tmpl) {
    s_ = LabeledSentence{};
    for (auto &slot : Tokenize(tmpl)) {
      if (slot == "P") {
        Emit(Person(), kSpanPer);
      } else if (slot == "L") {
        Emit(Place(), kSpanLoc);
      } else if (slot == "G") {
        Emit(Org(), kSpanOrg);
      } else if (slot == "T") {
        Emit(Choose(kTitles), kSpanO);
      } else if (slot == "D") {
        Emit(Choose(kDays), kSpanO);
      } else if (slot == "N") {
        Emit(std::to_string(1 + Pick(99)), kSpanO);
      } else if (slot == "Y") {
        Emit(std::to_string(1950 + Pick(70)), kSpanO);
      } else if (slot == "V") {
        Emit(Choose(kVisit), kSpanO);
      } else if (slot == "S") {
        Emit(Choose(kSay), kSpanO);
      } else if (slot == "A") {
        Emit(Choose(kAnnounce), kSpanO);
      } else if (slot == "H") {
        Emit(Choose(kThings), kSpanO);
      } else {
        Emit(slot, kSpanO);
      }
    }
    return std::move(s_);
  }

 private:
  std::mt19937_64 rng_;
  double novel_rate_;
  LabeledSentence s_;
};

}  // namespace

std::vector<LabeledSentence> GenerateSyntheticCorpus(const SynthConfig &cfg) {
  if (cfg.sentences < 1) {
    throw Error(ErrorCode::kBadConfig, "sentence count must be positive");
  }
  if (!(cfg.novel_name_rate >= 0.0 && cfg.novel_name_rate <= 1.0)) {
    throw Error(ErrorCode::kBadConfig, "novel_name_rate must be in [0, 1]");
  }
  Builder b(cfg.seed, cfg.novel_name_rate);
  std::vector<LabeledSentence> out;
  out.reserve(cfg.sentences);
  for (int i = 0; i < cfg.sentences; ++i) {
    auto s = b.Sentence(kTemplates[b.Pick(kTemplates.size())]);
    s.id = "synth:" + std::to_string(i + 1);
    s.provenance = Provenance::kSynthetic;
    out.push_back(std::move(s));
  }
  return out;
}

nlohmann::json SyntheticRuleConfig() {
  nlohmann::json rules = nlohmann::json::array();
  rules.push_back({{"id", "title-person"},
                   {"trigger", {"Encik", "Puan", "Datuk", "Prof", "Sri", "Cik"}},
                   {"position", "precedes_entity"},
                   {"type", "PER"},
                   {"capitalization_required", true},
                   {"max_span_len", 4}});
  rules.push_back({{"id", "said-person"},
                   {"trigger", {"berkata", "menegaskan"}},
                   {"position", "follows_entity"},
                   {"type", "PER"},
                   {"capitalization_required", true},
                   {"max_span_len", 3}});
  rules.push_back({{"id", "river-place"},
                   {"trigger", {"Sungai", "Pulau", "Kota"}},
                   {"position", "is_prefix_token"},
                   {"type", "LOC"},
                   {"capitalization_required", true},
                   {"max_span_len", 2}});
  rules.push_back({{"id", "org-prefix"},
                   {"trigger", {"Universiti", "Kementerian", "Majlis",
                                "Persatuan", "Lembaga", "Suruhanjaya"}},
                   {"position", "is_prefix_token"},
                   {"type", "ORG"},
                   {"capitalization_required", true},
                   {"max_span_len", 5}});
  nlohmann::json gaz = nlohmann::json::array();
  for (auto p : kPlaces) gaz.push_back({{"surface", p}, {"type", "LOC"}});
  for (auto o : {"Petronas", "Maybank", "Axiata", "Sime Darby",
                 "Bank Negara Malaysia", "Dewan Rakyat"}) {
    gaz.push_back({{"surface", o}, {"type", "ORG"}});
  }
  return {{"case_fold", false}, {"rules", rules}, {"gazetteer", gaz}};
}

}  // namespace mtbr
