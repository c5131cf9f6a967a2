// Copyright 2026 The tlink Authors.
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

#include "tlink/timeml.hpp"

#include <gtest/gtest.h>

namespace tlink {
namespace {

TEST(ImportTimeml, SingleEventPairWithBeforeLink) {
  const char* markup = R"(<TimeML><DOCID>t1</DOCID><TEXT>
The firm <EVENT eid="e1" class="OCCURRENCE">announced</EVENT> results and
<EVENT eid="e2" class="OCCURRENCE">postponed</EVENT> the vote.</TEXT>
<MAKEINSTANCE eiid="ei1" eventID="e1" tense="PAST" aspect="NONE" polarity="POS" pos="VERB"/>
<MAKEINSTANCE eiid="ei2" eventID="e2" tense="PAST" aspect="NONE" polarity="POS" pos="VERB"/>
<TLINK lid="l1" relType="BEFORE" eventInstanceID="ei1" relatedToEventInstance="ei2"/>
</TimeML>)";
  const auto result = import_timeml_subset(markup);
  const Document& doc = result.document;
  EXPECT_EQ(doc.doc_id, "t1");
  ASSERT_EQ(doc.events.size(), 2u);
  EXPECT_EQ(doc.events[0].tense, Tense::kPast);
  EXPECT_EQ(doc.events[0].word, "announced");
  ASSERT_EQ(doc.tlinks.size(), 1u);
  EXPECT_EQ(doc.tlinks[0].label, make_label(Raw14::kBefore));
  EXPECT_EQ(result.skipped_time_links, 0u);
  EXPECT_EQ(doc.sentences[doc.events[1].sentence_index][doc.events[1].token_span.begin],
            "postponed");
}

TEST(ImportTimeml, EventTimeLinksAreSkippedAndCounted) {
  const char* markup = R"(<TEXT>It <EVENT eid="e1" class="STATE">expires</EVENT> on
<TIMEX3 tid="t1" type="DATE" value="1990-12-31">Dec 31</TIMEX3>.</TEXT>
<MAKEINSTANCE eiid="ei1" eventID="e1" tense="PRESENT" aspect="NONE" polarity="POS" pos="VERB"/>
<TLINK lid="l1" relType="IS_INCLUDED" eventInstanceID="ei1" relatedToTime="t1"/>)";
  const auto result = import_timeml_subset(markup, "doc");
  EXPECT_EQ(result.skipped_time_links, 1u);
  EXPECT_TRUE(result.document.tlinks.empty());
}

// Sentence modelled on a TimeBank newswire example: keep ENDED_BY expires,
// expires ENDS restriction, expires IS_INCLUDED a date.
TEST(ImportTimeml, NewswireFragmentTranscribesEventLinks) {
  const char* markup = R"(<TimeML><DOCID>wsj_like</DOCID><TEXT><s>Powerful political
<EVENT eid="e1" class="OCCURRENCE">pressures</EVENT> may
<EVENT eid="e2" class="I_ACTION">convince</EVENT> the Conservative government to
<EVENT eid="e3" class="OCCURRENCE">keep</EVENT> its so-called golden share, which
limits any individual holding to 15%, until the
<EVENT eid="e4" class="STATE">restriction</EVENT>
<EVENT eid="e5" class="OCCURRENCE">expires</EVENT> on
<TIMEX3 tid="t1" type="DATE">Dec. 31, 1990</TIMEX3>.</s></TEXT>
<MAKEINSTANCE eiid="ei1" eventID="e1" tense="NONE" aspect="NONE" polarity="POS" pos="NOUN"/>
<MAKEINSTANCE eiid="ei2" eventID="e2" tense="NONE" aspect="NONE" polarity="POS" modality="may" pos="VERB"/>
<MAKEINSTANCE eiid="ei3" eventID="e3" tense="INFINITIVE" aspect="NONE" polarity="POS" pos="VERB"/>
<MAKEINSTANCE eiid="ei4" eventID="e4" tense="NONE" aspect="NONE" polarity="POS" pos="NOUN"/>
<MAKEINSTANCE eiid="ei5" eventID="e5" tense="PRESENT" aspect="NONE" polarity="POS" pos="VERB"/>
<TLINK lid="l1" relType="BEFORE" eventInstanceID="ei1" relatedToEventInstance="ei2"/>
<TLINK lid="l2" relType="ENDED_BY" eventInstanceID="ei3" relatedToEventInstance="ei5"/>
<TLINK lid="l3" relType="ENDS" eventInstanceID="ei5" relatedToEventInstance="ei4"/>
<TLINK lid="l4" relType="IS_INCLUDED" eventInstanceID="ei5" relatedToTime="t1"/>
</TimeML>)";
  const auto result = import_timeml_subset(markup);
  const Document& doc = result.document;
  EXPECT_EQ(doc.events.size(), 5u);
  EXPECT_EQ(result.skipped_time_links, 1u);
  ASSERT_EQ(doc.tlinks.size(), 3u);
  EXPECT_EQ(doc.tlinks[1].source, "ei3");
  EXPECT_EQ(doc.tlinks[1].target, "ei5");
  EXPECT_EQ(doc.tlinks[1].label, make_label(Raw14::kEndedBy));
  EXPECT_EQ(doc.event("ei3").word, "keep");
  EXPECT_EQ(doc.event("ei3").tense, Tense::kNone);   // INFINITIVE is not a tense value
  EXPECT_EQ(doc.event("ei2").modality, Modality::kNone);  // "may" is not in the range
  EXPECT_EQ(doc.event("ei2").event_class, EventClass::kIAction);
  EXPECT_EQ(doc.event("ei1").pos, PartOfSpeech::kNoun);
  EXPECT_EQ(doc.event("ei5").sentence_index, doc.event("ei1").sentence_index);
}

TEST(ImportTimeml, UnmatchedTagsAreParseErrors) {
  EXPECT_THROW(import_timeml_subset("<TEXT><EVENT eid=\"e1\" class=\"STATE\">x</TEXT>", "d"),
               ParseError);
  EXPECT_THROW(import_timeml_subset("<TEXT>text", "d"), ParseError);
  EXPECT_THROW(import_timeml_subset("text</TEXT>", "d"), ParseError);
}

TEST(ImportTimeml, InstanceOfUnknownEventIsAValidationError) {
  const char* markup = R"(<TEXT><EVENT eid="e1" class="STATE">x</EVENT></TEXT>
<MAKEINSTANCE eiid="ei1" eventID="e7" tense="NONE" aspect="NONE" pos="VERB"/>)";
  EXPECT_THROW(import_timeml_subset(markup, "d"), ValidationError);
}

}  // namespace
}  // namespace tlink
