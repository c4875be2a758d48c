"""Beta regression with logit mean and log precision links."""
