package org.softlang.company.xjc;

public class Employee {
}
